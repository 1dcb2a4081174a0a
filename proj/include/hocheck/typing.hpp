#ifndef HOCHECK_TYPING_HPP
#define HOCHECK_TYPING_HPP

#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "print.hpp"
#include "signature.hpp"
#include "term.hpp"

namespace hocheck {

struct MetaTypeError : std::runtime_error {
    enum class Kind { undeclared, ill_typed, uninferable, restricted };

    MetaTypeError(Kind k, Term sub, const std::string& msg) : std::runtime_error(msg), kind(k), subterm(std::move(sub))
    {
    }

    Kind kind;
    Term subterm;
};

/// Type parameter of an occurrence of a polymorphic builtin (`lemma_pf`, `def_pf`,
/// `elam`, `pi`), read off its instantiated meta-type.
inline std::optional<MetaType> poly_instance(const Term& c)
{
    if (!c.is_constant() || c.stamp() != 0) return std::nullopt;
    const MetaType& t = c.type();
    if (c.name() == "lemma_pf" || c.name() == "elam" || c.name() == names::pi) {
        if (t.is_arrow() && t.domain().is_arrow()) return t.domain().domain();
    } else if (c.name() == "def_pf") {
        if (t.is_arrow() && t.codomain().is_arrow() && t.codomain().domain().is_arrow())
            return t.codomain().domain().domain();
    }
    return std::nullopt;
}

/// Hindley-Milner style inference over simple meta-types: every polymorphic constant
/// occurrence and every unannotated binder gets its own type variable, and the
/// solution must be ground.
class TypeInference {
public:
    explicit TypeInference(const Signature& sig) : sig_(sig) {}

    MetaType resolve(const MetaType& t) const
    {
        switch (t.kind()) {
        case MetaType::Kind::base: return t;
        case MetaType::Kind::var: {
            auto it = subst_.find(t.var_id());
            return it == subst_.end() ? t : resolve(it->second);
        }
        case MetaType::Kind::arrow: return MetaType::arrow(resolve(t.domain()), resolve(t.codomain()));
        }
        return t;
    }

    bool unify(const MetaType& a0, const MetaType& b0)
    {
        MetaType a = shallow(a0), b = shallow(b0);
        if (a.is_var() && b.is_var() && a.var_id() == b.var_id()) return true;
        if (a.is_var()) return bind(a.var_id(), b);
        if (b.is_var()) return bind(b.var_id(), a);
        if (a.is_base() && b.is_base()) return a.base_kind() == b.base_kind();
        if (a.is_arrow() && b.is_arrow()) return unify(a.domain(), b.domain()) && unify(a.codomain(), b.codomain());
        return false;
    }

    /// Infers the (possibly non-ground) meta-type of `t`.
    MetaType infer(const Term& t)
    {
        std::vector<MetaType> ctx;
        return infer(t, ctx);
    }

    /// Rebuilds `t` with every type variable resolved. Throws when one remains.
    Term rebuild(const Term& t)
    {
        auto it = rebuilt_.find(t.id());
        if (it != rebuilt_.end()) return it->second;
        Term out;
        switch (t.kind()) {
        case TermKind::constant: {
            MetaType ty = ground(t.type(), t);
            out = ty == t.type() ? t : Term::constant(t.name(), ty, t.stamp());
            if (t.name() == "elam" && t.stamp() == 0) {
                MetaType inst = *poly_instance(out);
                if (!inst.is_base(Base::tp) && !inst.is_base(Base::tm))
                    throw MetaTypeError(MetaTypeError::Kind::restricted, t,
                                        "elam may only bind variables of meta-type tp or tm, not " + inst.str());
            }
            break;
        }
        case TermKind::bound: out = t; break;
        case TermKind::meta: {
            MetaType ty = ground(t.type(), t);
            out = ty == t.type() ? t : Term::meta(t.meta_id(), ty);
            break;
        }
        case TermKind::app: {
            Term f = rebuild(t.fun());
            Term a = rebuild(t.arg());
            out = f.same(t.fun()) && a.same(t.arg()) ? t : Term::app(f, a);
            break;
        }
        case TermKind::lam: {
            MetaType ty = ground(t.type(), t);
            Term b = rebuild(t.body());
            out = ty == t.type() && b.same(t.body()) ? t : Term::lam(ty, b, t.name());
            break;
        }
        }
        rebuilt_.emplace(t.id(), out);
        return out;
    }

private:
    MetaType shallow(const MetaType& t) const
    {
        MetaType cur = t;
        while (cur.is_var()) {
            auto it = subst_.find(cur.var_id());
            if (it == subst_.end()) break;
            cur = it->second;
        }
        return cur;
    }

    bool bind(std::uint32_t v, const MetaType& t)
    {
        if (resolve(t).occurs(v)) return false;
        subst_[v] = t;
        return true;
    }

    MetaType ground(const MetaType& t, const Term& where) const
    {
        MetaType r = resolve(t);
        if (!r.is_ground())
            throw MetaTypeError(MetaTypeError::Kind::uninferable, where,
                                "cannot infer a ground meta-type for '" + describe(where) + "'");
        return r;
    }

    std::string describe(const Term& t) const
    {
        if (t.is_constant()) return t.name();
        if (t.is_lam()) return (t.name().empty() ? std::string("x") : t.name()) + "\\ ...";
        try {
            return print(t, sig_);
        } catch (...) {
            return "<term>";
        }
    }

    MetaType infer(const Term& t, std::vector<MetaType>& ctx)
    {
        switch (t.kind()) {
        case TermKind::constant: {
            if (t.stamp() != 0) return t.type();
            const ConstDecl* d = sig_.find(t.name());
            if (!d)
                throw MetaTypeError(MetaTypeError::Kind::undeclared, t, "undeclared constant '" + t.name() + "'");
            if (!unify(t.type(), Signature::instantiate(*d)))
                throw MetaTypeError(MetaTypeError::Kind::ill_typed, t,
                                    "constant '" + t.name() + "' used at meta-type " + resolve(t.type()).str() +
                                        " but declared " + d->type.str());
            return t.type();
        }
        case TermKind::bound:
            if (t.index() >= ctx.size())
                throw MetaTypeError(MetaTypeError::Kind::ill_typed, t, "unbound de Bruijn index");
            return ctx[ctx.size() - 1 - t.index()];
        case TermKind::meta: return t.type();
        case TermKind::app: {
            MetaType f = infer(t.fun(), ctx);
            MetaType a = infer(t.arg(), ctx);
            MetaType r = MetaType::fresh_var();
            if (!unify(f, MetaType::arrow(a, r))) {
                std::vector<MetaType> dummy;
                throw MetaTypeError(MetaTypeError::Kind::ill_typed, t,
                                    "ill-typed application in '" + describe_open(t, ctx) + "': function has meta-type " +
                                        resolve(f).str() + ", argument has " + resolve(a).str());
            }
            return r;
        }
        case TermKind::lam: {
            ctx.push_back(t.type());
            MetaType b = infer(t.body(), ctx);
            ctx.pop_back();
            return MetaType::arrow(t.type(), b);
        }
        }
        return MetaType::o();
    }

    std::string describe_open(const Term& t, const std::vector<MetaType>& ctx) const
    {
        if (!t.closed() && t.loose() > 0) {
            // Close over the context so the printer has names for loose indices.
            Term closed = t;
            for (std::size_t i = 0; i < t.loose() && i < ctx.size(); ++i)
                closed = Term::lam(ctx[ctx.size() - 1 - i], closed, "v" + std::to_string(i));
            return describe(closed);
        }
        return describe(t);
    }

    const Signature& sig_;
    std::unordered_map<std::uint32_t, MetaType> subst_;
    std::unordered_map<const void*, Term> rebuilt_;
};

/// Resolves every type variable in `t` (binder types and polymorphic constant
/// instances) against the signature, optionally at an expected meta-type.
inline Term elaborate(const Term& t, const Signature& sig, const std::optional<MetaType>& expected = std::nullopt)
{
    TypeInference inf(sig);
    MetaType ty = inf.infer(t);
    if (expected && !inf.unify(ty, *expected))
        throw MetaTypeError(MetaTypeError::Kind::ill_typed, t,
                            "expected meta-type " + expected->str() + " but found " + inf.resolve(ty).str());
    return inf.rebuild(t);
}

/// The unique ground meta-type of `t`.
inline MetaType infer_meta_type(const Term& t, const Signature& sig)
{
    TypeInference inf(sig);
    MetaType ty = inf.infer(t);
    inf.rebuild(t);
    return inf.resolve(ty);
}

} // namespace hocheck

#endif // HOCHECK_TYPING_HPP
