#ifndef HOCHECK_NORMALIZE_HPP
#define HOCHECK_NORMALIZE_HPP

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "term.hpp"

namespace hocheck {

/// Returns the binding of a metavariable, or nullptr when it is unbound.
using MetaLookup = std::function<const Term*(std::uint64_t)>;

/// Computes beta-normal, eta-long forms.
///
/// Binder types of the enclosing context are kept on a stack so that heads which are
/// de Bruijn variables can be eta-expanded. Closed subterms are memoized per run,
/// which keeps shared input subterms shared in the output.
class Normalizer {
public:
    explicit Normalizer(const MetaLookup* lookup = nullptr, std::vector<MetaType> ctx = {})
        : lookup_(lookup), ctx_(std::move(ctx))
    {
    }

    Term operator()(const Term& t) { return norm(t); }

    /// Eta-expands a neutral term of the given meta-type.
    static Term eta_expand(const Term& neutral, const MetaType& type)
    {
        if (!type.is_arrow()) return neutral;
        MetaType dom = type.domain();
        Term inner = Term::app(shift(neutral, 1), eta_expand(Term::bound(0), dom));
        Term result = Term::lam(dom, eta_expand(inner, type.codomain()), "x");
        return result;
    }

private:
    // A guard against implementation bugs only; simply-typed terms always normalize.
    static constexpr std::uint64_t kFuel = 200'000'000;

    const Term* lookup(const Term& m) const { return lookup_ && *lookup_ ? (*lookup_)(m.meta_id()) : nullptr; }

    MetaType head_type(const Term& h) const
    {
        switch (h.kind()) {
        case TermKind::constant:
        case TermKind::meta: return h.type();
        case TermKind::bound:
            if (h.index() >= ctx_.size()) throw StructuralError("normalize: loose de Bruijn index");
            return ctx_[ctx_.size() - 1 - h.index()];
        default: throw StructuralError("normalize: bad head");
        }
    }

    Term norm(const Term& t)
    {
        if (++steps_ > kFuel) throw std::logic_error("normalize: fuel exhausted");
        if (t.marked_normal() && !t.has_meta()) return t;

        const bool memoizable = t.closed();
        if (memoizable) {
            auto it = memo_.find(t.id());
            if (it != memo_.end()) return it->second;
        }

        Term result = norm_uncached(t);
        if (!result.has_meta()) result.mark_normal();
        if (memoizable) memo_.emplace(t.id(), result);
        return result;
    }

    Term norm_uncached(const Term& t)
    {
        if (t.is_lam()) {
            ctx_.push_back(t.type());
            Term b = norm(t.body());
            ctx_.pop_back();
            return b.same(t.body()) ? t : Term::lam(t.type(), std::move(b), t.name());
        }

        Term head = t;
        std::vector<Term> rev_args;
        bool reduced = false;
        for (;;) {
            if (++steps_ > kFuel) throw std::logic_error("normalize: fuel exhausted");
            if (head.is_app()) {
                rev_args.push_back(head.arg());
                head = head.fun();
            } else if (head.is_lam() && !rev_args.empty()) {
                head = instantiate(head.body(), rev_args.back());
                rev_args.pop_back();
                reduced = true;
            } else if (head.is_meta()) {
                const Term* b = lookup(head);
                if (!b) break;
                head = *b;
                reduced = true;
            } else {
                break;
            }
        }

        if (head.is_lam()) return norm(head); // all arguments consumed

        std::vector<Term> args(rev_args.rbegin(), rev_args.rend());
        bool changed = reduced;
        for (Term& a : args) {
            Term na = norm(a);
            if (!na.same(a)) changed = true;
            a = std::move(na);
        }
        Term applied = changed ? Term::apps(head, args) : t;
        MetaType rest = head_type(head).strip(args.size());
        return eta_expand(applied, rest);
    }

    const MetaLookup* lookup_;
    std::vector<MetaType> ctx_;
    std::unordered_map<const void*, Term> memo_;
    std::uint64_t steps_ = 0;
};

/// Beta-normal, eta-long form of a closed (or context-typed) term.
inline Term normalize(const Term& t, const MetaLookup* lookup = nullptr, std::vector<MetaType> ctx = {})
{
    Normalizer n(lookup, std::move(ctx));
    return n(t);
}

inline Term normalize(const Term& t, const MetaLookup& lookup) { return normalize(t, &lookup); }

/// Applies `f` to `args` and normalizes.
inline Term apply_normal(const Term& f, const std::vector<Term>& args, const MetaLookup* lookup = nullptr,
                         std::vector<MetaType> ctx = {})
{
    return normalize(Term::apps(f, args), lookup, std::move(ctx));
}

/// True iff the normal forms are alpha-equivalent.
inline bool alpha_beta_eq(const Term& a, const Term& b, std::vector<MetaType> ctx = {})
{
    Normalizer n(nullptr, std::move(ctx));
    return alpha_eq(n(a), n(b));
}

} // namespace hocheck

#endif // HOCHECK_NORMALIZE_HPP
