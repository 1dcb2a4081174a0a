#ifndef HOCHECK_SIGNATURE_HPP
#define HOCHECK_SIGNATURE_HPP

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "meta_type.hpp"

namespace hocheck {

enum class Fixity { infixl, infixr, infix };

struct Infix {
    Fixity fixity;
    int precedence;

    friend bool operator==(const Infix&, const Infix&) = default;
};

/// A constant's meta-type. Polymorphic builtins use type variable 0 for their parameter.
struct ConstDecl {
    MetaType type;
    bool builtin = false;
    bool polymorphic = false;
};

struct SignatureError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace names {
// Goal-level connectives as they appear in terms of meta-type o.
inline constexpr const char* pi = "pi";
inline constexpr const char* conj = ",";
inline constexpr const char* impl_fwd = "==>>";
inline constexpr const char* impl_bwd = "<<==";
inline constexpr const char* proves = "proves";
inline constexpr const char* hastype = "hastype";
inline constexpr const char* assump = "assump";
} // namespace names

/// Constant declarations and the infix table.
class Signature {
public:
    /// The object logic's builtin constants together with the lemma, definition and
    /// goal connectives.
    static const Signature& core()
    {
        static const Signature sig = make_core();
        return sig;
    }

    const ConstDecl* find(const std::string& name) const
    {
        auto it = consts_.find(name);
        return it == consts_.end() ? nullptr : &it->second;
    }

    bool is_builtin(const std::string& name) const
    {
        const ConstDecl* d = find(name);
        return d && d->builtin;
    }

    /// Adds a user constant. Builtins cannot be redeclared; a user constant may be
    /// redeclared only at the same meta-type.
    void declare(const std::string& name, const MetaType& type)
    {
        if (!type.is_ground()) throw SignatureError("meta-type of '" + name + "' is not ground");
        if (const ConstDecl* d = find(name)) {
            if (d->builtin) throw SignatureError("cannot redeclare builtin constant '" + name + "'");
            if (d->type != type)
                throw SignatureError("'" + name + "' already declared with meta-type " + d->type.str());
            return;
        }
        consts_.emplace(name, ConstDecl{type, false, false});
        order_.push_back(name);
    }

    /// Adds an infix entry. Builtin fixities are fixed; repeating one verbatim is accepted.
    void declare_infix(const std::string& name, Infix infix)
    {
        if (auto it = infix_.find(name); it != infix_.end()) {
            if (it->second == infix) return;
            if (is_builtin(name)) throw SignatureError("cannot change the fixity of builtin '" + name + "'");
        }
        if (!find(name)) throw SignatureError("infix declaration for undeclared constant '" + name + "'");
        infix_[name] = infix;
    }

    const Infix* infix(const std::string& name) const
    {
        auto it = infix_.find(name);
        return it == infix_.end() ? nullptr : &it->second;
    }

    /// User constants in declaration order.
    const std::vector<std::string>& user_constants() const { return order_; }

    /// A copy of the scheme with its parameter replaced by a fresh type variable.
    static MetaType instantiate(const ConstDecl& d)
    {
        if (!d.polymorphic) return d.type;
        return substitute(d.type, 0, MetaType::fresh_var());
    }

    static MetaType substitute(const MetaType& t, std::uint32_t var, const MetaType& by)
    {
        switch (t.kind()) {
        case MetaType::Kind::base: return t;
        case MetaType::Kind::var: return t.var_id() == var ? by : t;
        case MetaType::Kind::arrow:
            return MetaType::arrow(substitute(t.domain(), var, by), substitute(t.codomain(), var, by));
        }
        return t;
    }

private:
    static Signature make_core()
    {
        Signature s;
        const MetaType tp = MetaType::tp(), tm = MetaType::tm(), pf = MetaType::pf(), o = MetaType::o();
        const MetaType a = MetaType::var(0);
        auto mono = [&](const char* n, MetaType t) { s.consts_.emplace(n, ConstDecl{std::move(t), true, false}); };
        auto poly = [&](const char* n, MetaType t) { s.consts_.emplace(n, ConstDecl{std::move(t), true, true}); };

        mono("form", tp);
        mono("intty", tp);
        mono("arrow", arrows(tp, tp, tp));
        mono("pair", arrows(tp, tp, tp));

        mono("eq", arrows(tp, tm, tm, tm));
        mono("imp", arrows(tm, tm, tm));
        mono("forall", arrows(tp, arrows(tm, tm), tm));
        mono("false", tm);

        mono("lam", arrows(arrows(tm, tm), tm));
        mono("app", arrows(tp, tm, tm, tm));
        mono("mkpair", arrows(tm, tm, tm));
        mono("fst", arrows(tp, tm, tm));
        mono("snd", arrows(tp, tm, tm));

        mono(names::hastype, arrows(tm, tp, o));
        mono(names::proves, arrows(pf, tm, o));
        mono(names::assump, arrows(o, o));

        mono("refl", pf);
        mono("beta", pf);
        mono("fstpair", pf);
        mono("sndpair", pf);
        mono("surjpair", pf);
        mono("congr", arrows(tp, tm, tm, arrows(tm, tm), pf, pf, pf));
        mono("imp_i", arrows(arrows(pf, pf), pf));
        mono("imp_e", arrows(tm, pf, pf, pf));
        mono("forall_i", arrows(arrows(tm, pf), pf));
        mono("forall_e", arrows(tp, arrows(tm, tm), pf, tm, pf));

        poly("lemma_pf", arrows(arrows(a, o), a, arrows(a, pf), pf));
        poly("def_pf", arrows(tp, arrows(a, o), a, arrows(a, pf), pf));
        mono("def", pf);
        poly("elam", arrows(arrows(a, pf), pf));
        mono("extract", arrows(tm, pf, pf));
        mono("extractGoal", arrows(o, pf, pf));

        poly(names::pi, arrows(arrows(a, o), o));
        mono(names::conj, arrows(o, o, o));
        mono(names::impl_fwd, arrows(o, o, o));
        mono(names::impl_bwd, arrows(o, o, o));

        s.infix_["arrow"] = {Fixity::infixr, 8};
        s.infix_["imp"] = {Fixity::infixr, 7};
        s.infix_[names::impl_fwd] = {Fixity::infixr, 4};
        s.infix_[names::conj] = {Fixity::infixl, 3};
        s.infix_[names::impl_bwd] = {Fixity::infixl, 0};
        return s;
    }

    std::map<std::string, ConstDecl> consts_;
    std::map<std::string, Infix> infix_;
    std::vector<std::string> order_;
};

} // namespace hocheck

#endif // HOCHECK_SIGNATURE_HPP
