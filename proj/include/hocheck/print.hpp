#ifndef HOCHECK_PRINT_HPP
#define HOCHECK_PRINT_HPP

#include <cctype>
#include <set>
#include <string>
#include <vector>

#include "signature.hpp"
#include "term.hpp"

namespace hocheck {

/// Single-line printer for the surface syntax.
///
/// Output reparses to an alpha-equivalent term. Lambdas are parenthesized unless
/// they sit in a position that extends to the end of the enclosing expression.
/// Eigenvariables print as `name#stamp` and metavariables as `_M<id>`; those forms
/// only appear in diagnostics.
class Printer {
public:
    explicit Printer(const Signature& sig = Signature::core()) : sig_(sig) {}

    std::string operator()(const Term& t)
    {
        reserved_.clear();
        scope_.clear();
        for_each_constant(t, [&](const Term& c) { reserved_.insert(c.name()); });
        std::string out;
        expr(t, kLowest, true, out);
        return out;
    }

private:
    static constexpr int kLowest = -1;
    static constexpr int kApp = 100;
    static constexpr int kAtom = 101;

    std::string fresh_name(const Term& lam)
    {
        std::string base;
        for (char c : lam.name())
            if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'') base += c;
        if (base.empty()) base = "x";
        auto taken = [&](const std::string& n) {
            if (reserved_.count(n) || sig_.find(n)) return true;
            for (const auto& s : scope_)
                if (s == n) return true;
            return false;
        };
        if (!taken(base)) return base;
        for (int i = 1;; ++i) {
            std::string cand = base + std::to_string(i);
            if (!taken(cand)) return cand;
        }
    }

    void atom(const Term& t, std::string& out)
    {
        switch (t.kind()) {
        case TermKind::constant:
            if (t.stamp() != 0) {
                out += t.name() + "#" + std::to_string(t.stamp());
            } else if (sig_.infix(t.name())) {
                out += "(" + t.name() + ")";
            } else {
                out += t.name();
            }
            break;
        case TermKind::bound:
            if (t.index() < scope_.size())
                out += scope_[scope_.size() - 1 - t.index()];
            else
                out += "_B" + std::to_string(t.index() - scope_.size());
            break;
        case TermKind::meta: out += "_M" + std::to_string(t.meta_id()); break;
        default: break;
        }
    }

    void lambda(const Term& t, bool open, std::string& out)
    {
        if (!open) out += "(";
        std::string name = fresh_name(t);
        out += name + "\\ ";
        scope_.push_back(name);
        expr(t.body(), kLowest, true, out);
        scope_.pop_back();
        if (!open) out += ")";
    }

    void expr(const Term& t, int min_prec, bool open, std::string& out)
    {
        if (t.is_lam()) {
            lambda(t, open, out);
            return;
        }
        Spine s = spine(t);
        if (s.args.empty()) {
            atom(t, out);
            return;
        }

        if (s.head.is_constant() && s.head.stamp() == 0) {
            if (s.head.name() == names::pi && s.args.size() == 1 && s.args[0].is_lam()) {
                if (!open) out += "(";
                out += "pi ";
                lambda(s.args[0], true, out);
                if (!open) out += ")";
                return;
            }
            const Infix* fx = sig_.infix(s.head.name());
            if (fx && s.args.size() == 2) {
                const int p = fx->precedence;
                const bool parens = p < min_prec;
                const bool inner_open = parens || open;
                if (parens) out += "(";
                expr(s.args[0], fx->fixity == Fixity::infixl ? p : p + 1, false, out);
                out += " " + s.head.name() + " ";
                expr(s.args[1], fx->fixity == Fixity::infixr ? p : p + 1, inner_open, out);
                if (parens) out += ")";
                return;
            }
        }

        const bool parens = kApp < min_prec;
        const bool inner_open = parens || open;
        if (parens) out += "(";
        if (s.head.is_lam())
            lambda(s.head, false, out);
        else
            atom(s.head, out);
        for (std::size_t i = 0; i < s.args.size(); ++i) {
            out += " ";
            const bool last = i + 1 == s.args.size();
            expr(s.args[i], kAtom, last && inner_open && s.args[i].is_lam(), out);
        }
        if (parens) out += ")";
    }

    const Signature& sig_;
    std::set<std::string> reserved_;
    std::vector<std::string> scope_;
};

inline std::string print(const Term& t, const Signature& sig = Signature::core()) { return Printer(sig)(t); }

} // namespace hocheck

#endif // HOCHECK_PRINT_HPP
