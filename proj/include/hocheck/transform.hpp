#ifndef HOCHECK_TRANSFORM_HPP
#define HOCHECK_TRANSFORM_HPP

#include <algorithm>
#include <cstdint>
#include <limits>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "normalize.hpp"
#include "term.hpp"

namespace hocheck {

namespace detail {

class LemmaExpander {
public:
    explicit LemmaExpander(std::vector<MetaType> ctx) : ctx_(std::move(ctx)) {}

    Term operator()(const Term& t)
    {
        const bool closed = t.closed();
        if (closed) {
            auto it = memo_.find(t.id());
            if (it != memo_.end()) return it->second;
        }
        Term out = expand(t);
        if (closed) memo_.emplace(t.id(), out);
        return out;
    }

private:
    Term expand(const Term& t)
    {
        switch (t.kind()) {
        case TermKind::lam: {
            ctx_.push_back(t.type());
            Term b = (*this)(t.body());
            ctx_.pop_back();
            return b.same(t.body()) ? t : Term::lam(t.type(), b, t.name());
        }
        case TermKind::app: {
            Spine s = spine(t);
            std::vector<Term> args;
            bool changed = false;
            for (const Term& a : s.args) {
                args.push_back((*this)(a));
                changed = changed || !args.back().same(a);
            }
            if (s.head.is_constant("lemma_pf") && args.size() == 3) {
                Term r = normalize(Term::app(args[2], args[1]), nullptr, ctx_);
                // Substitution can only expose lemma nodes already expanded, but a
                // second pass keeps the result free of them in every case.
                return mentions_constant(r, "lemma_pf") ? (*this)(r) : r;
            }
            return changed ? Term::apps(s.head, args) : t;
        }
        default: return t;
        }
    }

    std::vector<MetaType> ctx_;
    std::unordered_map<const void*, Term> memo_;
};

} // namespace detail

/// Replaces every `lemma_pf I L R` by the normal form of `R L`, innermost first.
/// `ctx` gives the binder meta-types of loose indices in `proof`.
inline Term expand_lemmas(const Term& proof, std::vector<MetaType> ctx = {})
{
    return detail::LemmaExpander(std::move(ctx))(proof);
}

struct ProofStats {
    std::uint64_t shared_nodes = 0;
    /// Saturates at the maximum representable value.
    std::uint64_t tree_nodes = 0;
    std::uint64_t lemma_count = 0;
    std::uint64_t def_count = 0;
    std::uint64_t max_depth = 0;
};

inline ProofStats proof_stats(const Term& proof)
{
    struct Info {
        std::uint64_t tree, lemmas, defs, depth;
    };
    constexpr std::uint64_t kMax = std::numeric_limits<std::uint64_t>::max();
    auto add = [](std::uint64_t a, std::uint64_t b) { return a > kMax - b ? kMax : a + b; };

    std::unordered_map<const void*, Info> info;
    // Post-order over the DAG without recursion.
    std::vector<std::pair<Term, bool>> stack{{proof, false}};
    while (!stack.empty()) {
        auto [t, expanded] = stack.back();
        stack.pop_back();
        if (info.count(t.id())) continue;
        if (!expanded) {
            stack.push_back({t, true});
            if (t.is_app()) {
                stack.push_back({t.arg(), false});
                stack.push_back({t.fun(), false});
            } else if (t.is_lam()) {
                stack.push_back({t.body(), false});
            }
            continue;
        }
        Info i{1, 0, 0, 1};
        if (t.is_constant("lemma_pf")) i.lemmas = 1;
        if (t.is_constant("def_pf")) i.defs = 1;
        auto merge = [&](const Term& c) {
            const Info& ci = info.at(c.id());
            i.tree = add(i.tree, ci.tree);
            i.lemmas = add(i.lemmas, ci.lemmas);
            i.defs = add(i.defs, ci.defs);
            i.depth = std::max(i.depth, ci.depth + 1);
        };
        if (t.is_app()) {
            merge(t.fun());
            merge(t.arg());
        } else if (t.is_lam()) {
            merge(t.body());
        }
        info.emplace(t.id(), i);
    }
    const Info& root = info.at(proof.id());
    return {info.size(), root.tree, root.lemmas, root.defs, root.depth};
}

} // namespace hocheck

#endif // HOCHECK_TRANSFORM_HPP
