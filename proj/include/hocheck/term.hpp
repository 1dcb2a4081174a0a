#ifndef HOCHECK_TERM_HPP
#define HOCHECK_TERM_HPP

#include <algorithm>
#include <cstdint>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "meta_type.hpp"

namespace hocheck {

/// Thrown for malformed term manipulations (meta-type mismatches, bad indices).
struct StructuralError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class TermKind : std::uint8_t { constant, bound, meta, app, lam };

/// Immutable, shareable term of the meta-language.
///
/// Lambda-bound variables are de Bruijn indices. Constants carry a birth stamp:
/// zero for signature constants, strictly positive for kernel eigenvariables.
/// Metavariables are referenced by id; their bindings live in a kernel session.
class Term {
    struct Node;

public:
    Term() = default;

    static Term constant(std::string name, MetaType type, std::uint64_t stamp = 0)
    {
        auto n = std::make_shared<Node>();
        n->kind = TermKind::constant;
        n->name = std::move(name);
        n->type = std::move(type);
        n->stamp = stamp;
        return Term(std::move(n));
    }

    static Term bound(std::uint32_t index)
    {
        auto n = std::make_shared<Node>();
        n->kind = TermKind::bound;
        n->index = index;
        n->loose = index + 1;
        return Term(std::move(n));
    }

    static Term meta(std::uint64_t id, MetaType type)
    {
        auto n = std::make_shared<Node>();
        n->kind = TermKind::meta;
        n->stamp = id;
        n->type = std::move(type);
        n->has_meta = true;
        return Term(std::move(n));
    }

    static Term app(Term fun, Term arg)
    {
        auto n = std::make_shared<Node>();
        n->kind = TermKind::app;
        n->loose = std::max(fun.loose(), arg.loose());
        n->has_meta = fun.has_meta() || arg.has_meta();
        n->left = std::move(fun.node_);
        n->right = std::move(arg.node_);
        return Term(std::move(n));
    }

    static Term lam(MetaType binder, Term body, std::string hint = {})
    {
        auto n = std::make_shared<Node>();
        n->kind = TermKind::lam;
        n->type = std::move(binder);
        n->name = std::move(hint);
        n->loose = body.loose() > 0 ? body.loose() - 1 : 0;
        n->has_meta = body.has_meta();
        n->left = std::move(body.node_);
        return Term(std::move(n));
    }

    static Term apps(Term head, const std::vector<Term>& args)
    {
        for (const Term& a : args) head = app(std::move(head), a);
        return head;
    }

    explicit operator bool() const { return static_cast<bool>(node_); }

    TermKind kind() const { return node_->kind; }
    bool is_constant() const { return kind() == TermKind::constant; }
    bool is_bound() const { return kind() == TermKind::bound; }
    bool is_meta() const { return kind() == TermKind::meta; }
    bool is_app() const { return kind() == TermKind::app; }
    bool is_lam() const { return kind() == TermKind::lam; }

    /// Constant name, or the binder's source name for a lambda.
    const std::string& name() const { return node_->name; }
    /// Constant type, metavariable type, or lambda binder type.
    const MetaType& type() const { return node_->type; }
    std::uint64_t stamp() const { return node_->stamp; }
    std::uint64_t meta_id() const { return node_->stamp; }
    std::uint32_t index() const { return node_->index; }

    Term fun() const { return Term(node_->left); }
    Term arg() const { return Term(node_->right); }
    Term body() const { return Term(node_->left); }

    bool is_eigen() const { return is_constant() && stamp() != 0; }
    bool is_constant(std::string_view n) const { return is_constant() && stamp() == 0 && name() == n; }

    /// One more than the largest loose de Bruijn index; zero when closed.
    std::uint32_t loose() const { return node_->loose; }
    bool closed() const { return loose() == 0; }
    bool has_meta() const { return node_->has_meta; }

    bool marked_normal() const { return node_->normal; }
    void mark_normal() const { node_->normal = true; }

    const void* id() const { return node_.get(); }
    bool same(const Term& other) const { return node_ == other.node_; }

private:
    struct Node {
        TermKind kind = TermKind::constant;
        std::string name;
        MetaType type;
        std::uint64_t stamp = 0;
        std::uint32_t index = 0;
        std::uint32_t loose = 0;
        bool has_meta = false;
        mutable bool normal = false;
        std::shared_ptr<const Node> left;
        std::shared_ptr<const Node> right;
    };

    explicit Term(std::shared_ptr<const Node> n) : node_(std::move(n)) {}

    std::shared_ptr<const Node> node_;
};

/// Head and arguments of an application spine.
struct Spine {
    Term head;
    std::vector<Term> args;
};

inline Spine spine(const Term& t)
{
    Spine s;
    Term cur = t;
    while (cur.is_app()) {
        s.args.push_back(cur.arg());
        cur = cur.fun();
    }
    std::reverse(s.args.begin(), s.args.end());
    s.head = cur;
    return s;
}

/// True when `t` is `name a1 .. an` for the signature constant `name` with exactly `n` arguments.
inline bool is_application_of(const Term& t, std::string_view name, std::size_t n)
{
    std::size_t count = 0;
    Term cur = t;
    while (cur.is_app()) {
        ++count;
        cur = cur.fun();
    }
    return count == n && cur.is_constant(name);
}

/// Adds `by` to every loose index at or above `cutoff`.
inline Term shift(const Term& t, std::uint32_t by, std::uint32_t cutoff = 0)
{
    if (by == 0 || t.loose() <= cutoff) return t;
    switch (t.kind()) {
    case TermKind::bound: return Term::bound(t.index() + by);
    case TermKind::app: {
        Term f = shift(t.fun(), by, cutoff);
        Term a = shift(t.arg(), by, cutoff);
        return Term::app(std::move(f), std::move(a));
    }
    case TermKind::lam: return Term::lam(t.type(), shift(t.body(), by, cutoff + 1), t.name());
    default: return t;
    }
}

/// Subtracts `by` from every loose index at or above `cutoff`. Indices in
/// [cutoff - by, cutoff) must not occur.
inline Term unshift(const Term& t, std::uint32_t by, std::uint32_t cutoff = 0)
{
    if (by == 0 || t.loose() <= cutoff) return t;
    switch (t.kind()) {
    case TermKind::bound:
        if (t.index() < cutoff + by) throw StructuralError("unshift: captured index");
        return Term::bound(t.index() - by);
    case TermKind::app: return Term::app(unshift(t.fun(), by, cutoff), unshift(t.arg(), by, cutoff));
    case TermKind::lam: return Term::lam(t.type(), unshift(t.body(), by, cutoff + 1), t.name());
    default: return t;
    }
}

namespace detail {

inline Term instantiate_at(const Term& body, const Term& arg, std::uint32_t depth)
{
    if (body.loose() <= depth) return body;
    switch (body.kind()) {
    case TermKind::bound:
        if (body.index() == depth) return shift(arg, depth);
        if (body.index() > depth) return Term::bound(body.index() - 1);
        return body;
    case TermKind::app:
        return Term::app(instantiate_at(body.fun(), arg, depth), instantiate_at(body.arg(), arg, depth));
    case TermKind::lam: return Term::lam(body.type(), instantiate_at(body.body(), arg, depth + 1), body.name());
    default: return body;
    }
}

} // namespace detail

/// Replaces de Bruijn index 0 of `body` by `arg` and lowers the remaining loose indices.
/// No normalization is performed.
inline Term instantiate(const Term& body, const Term& arg) { return detail::instantiate_at(body, arg, 0); }

/// Capture-avoiding substitution for the binder of a lambda. The argument's meta-type
/// must equal the binder's.
inline Term subst(const Term& lambda, const Term& arg, const MetaType& arg_type)
{
    if (!lambda.is_lam()) throw StructuralError("subst: not a lambda");
    if (lambda.type() != arg_type)
        throw StructuralError("subst: binder has meta-type " + lambda.type().str() + " but argument has " +
                              arg_type.str());
    return instantiate(lambda.body(), arg);
}

/// Replaces every occurrence of a constant selected by `pred` with index `depth`
/// (counted from the abstraction point). Used to turn a constant into a binder.
inline Term abstract_constant(const Term& t, const std::function<bool(const Term&)>& pred, std::uint32_t depth = 0)
{
    switch (t.kind()) {
    case TermKind::constant: return pred(t) ? Term::bound(depth) : t;
    case TermKind::app: {
        Term f = abstract_constant(t.fun(), pred, depth);
        Term a = abstract_constant(t.arg(), pred, depth);
        if (f.same(t.fun()) && a.same(t.arg())) return t;
        return Term::app(std::move(f), std::move(a));
    }
    case TermKind::lam: {
        Term b = abstract_constant(t.body(), pred, depth + 1);
        if (b.same(t.body())) return t;
        return Term::lam(t.type(), std::move(b), t.name());
    }
    default: return t;
    }
}

/// Wraps `body` (in which the constant `c` occurs) into a lambda binding `c`.
inline Term abstract_over(const Term& body, const Term& c, std::string hint = {})
{
    auto same_const = [&](const Term& x) { return x.name() == c.name() && x.stamp() == c.stamp(); };
    Term shifted = shift(body, 1);
    return Term::lam(c.type(), abstract_constant(shifted, same_const), hint.empty() ? c.name() : std::move(hint));
}

/// Structural equality. With de Bruijn indices this is alpha-equivalence;
/// binder hints are ignored.
inline bool alpha_eq(const Term& a, const Term& b)
{
    if (a.same(b)) return true;
    if (a.kind() != b.kind()) return false;
    switch (a.kind()) {
    case TermKind::constant: return a.stamp() == b.stamp() && a.name() == b.name();
    case TermKind::bound: return a.index() == b.index();
    case TermKind::meta: return a.meta_id() == b.meta_id();
    case TermKind::app: return alpha_eq(a.fun(), b.fun()) && alpha_eq(a.arg(), b.arg());
    case TermKind::lam: return a.type() == b.type() && alpha_eq(a.body(), b.body());
    }
    return false;
}

/// Calls `f` on every constant occurrence (tree order, shared subterms visited once).
template <class F>
void for_each_constant(const Term& t, F&& f)
{
    std::unordered_map<const void*, bool> seen;
    std::vector<Term> stack{t};
    while (!stack.empty()) {
        Term cur = std::move(stack.back());
        stack.pop_back();
        if (!seen.emplace(cur.id(), true).second) continue;
        switch (cur.kind()) {
        case TermKind::constant: f(cur); break;
        case TermKind::app:
            stack.push_back(cur.arg());
            stack.push_back(cur.fun());
            break;
        case TermKind::lam: stack.push_back(cur.body()); break;
        default: break;
        }
    }
}

inline bool mentions_constant(const Term& t, std::string_view name)
{
    bool found = false;
    for_each_constant(t, [&](const Term& c) {
        if (c.stamp() == 0 && c.name() == name) found = true;
    });
    return found;
}

} // namespace hocheck

#endif // HOCHECK_TERM_HPP
