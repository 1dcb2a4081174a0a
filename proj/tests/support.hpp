#ifndef HOCHECK_TESTS_SUPPORT_HPP
#define HOCHECK_TESTS_SUPPORT_HPP

#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "hocheck/driver.hpp"
#include "hocheck/kernel.hpp"
#include "hocheck/library.hpp"
#include "hocheck/parse.hpp"
#include "hocheck/transform.hpp"
#include "hocheck/typing.hpp"

namespace hocheck::testing {

inline std::string corpus_path(const std::string& name) { return std::string(HOCHECK_CORPUS_DIR) + "/" + name; }

inline std::string slurp(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

inline SourceFile load(const std::string& name, const Signature& sig = Signature::core())
{
    return parse_file(slurp(corpus_path(name)), sig, corpus_path(name));
}

inline std::vector<Term> goals_of(const SourceFile& f)
{
    std::vector<Term> out;
    for (const auto& st : f.statements)
        if (auto* s = std::get_if<Solve>(&st)) out.push_back(s->goal);
    return out;
}

inline Term goal_of(const std::string& name) { return goals_of(load(name)).at(0); }

/// The proof of the first goal-position `proves` in a corpus file.
inline Term proof_of(const std::string& name) { return goal_proofs(goal_of(name)).at(0); }

/// Expands the lemmas of every proof in goal position.
inline Term expand_goal(const Term& g)
{
    return map_goal_proofs(g, [](const Term& p, const std::vector<MetaType>& c) { return expand_lemmas(p, c); });
}

inline int run_cli(Command cmd, std::vector<std::string> inputs, std::vector<std::string> libs = {},
                   std::string output = {}, std::string* out_text = nullptr, std::string* err_text = nullptr,
                   std::uint64_t budget = 1'000'000)
{
    RunConfig cfg;
    cfg.command = cmd;
    for (auto& i : inputs) cfg.inputs.push_back(corpus_path(i));
    for (auto& l : libs) cfg.libraries.push_back(corpus_path(l));
    cfg.output = std::move(output);
    cfg.step_budget = budget;
    cfg.trace = TraceLevel::quiet;
    std::ostringstream out, err;
    int rc = run(cfg, out, err);
    if (out_text) *out_text = out.str();
    if (err_text) *err_text = err.str();
    return rc;
}

/// The golden files in theorem order.
inline const std::vector<std::string>& golden_files()
{
    static const std::vector<std::string> f{"symm_simple.hol", "symm_lemma.hol", "symm_implicit.hol", "poly_symm.hol",
                                            "assoc_def.hol"};
    return f;
}

struct Negative {
    std::string file;
    std::string library; // when set, `file` is the library and the goal is symm_body.hol
    int exit;
};

inline const std::vector<Negative>& negative_cases()
{
    static const std::vector<Negative> n{
        {"negative/wrong_congr_template.hol", "", 1},
        {"negative/swapped_eq_arguments.hol", "", 1},
        {"negative/refl_unequal.hol", "", 1},
        {"negative/missing_hastype.hol", "", 1},
        {"negative/assump_hastype.hol", "", 2},
        {"negative/foreign_predicate.hol", "", 2},
        {"negative/eigen_escape_elam.hol", "", 1},
        {"negative/eigen_capture_assumption.hol", "", 1},
        {"negative/swapped_congr_args.hol", "", 1},
        {"negative/unbound_variable.hol", "", 2},
        {"negative/undeclared_constant.hol", "", 2},
        {"negative/elam_at_pf.hol", "", 2},
        {"negative/non_pattern.hol", "", 2},
        {"symm_body.hol", "negative/library_broken_symm.hol", 1},
    };
    return n;
}

inline int run_negative(const Negative& n, std::string* err = nullptr)
{
    if (n.library.empty()) return run_cli(Command::check, {n.file}, {}, {}, nullptr, err);
    return run_cli(Command::check, {n.file}, {n.library}, {}, nullptr, err);
}

// ---- random terms ----

/// Signature of the random term generator: the core constants plus a few user ones.
inline const Signature& gen_signature()
{
    static const Signature sig = [] {
        Signature s = Signature::core();
        s.declare("c", MetaType::tm());
        s.declare("d", MetaType::tm());
        s.declare("f", MetaType::arrow(MetaType::tm(), MetaType::tm()));
        s.declare("g", arrows(MetaType::tm(), MetaType::tm(), MetaType::tm()));
        s.declare("h", MetaType::arrow(MetaType::arrow(MetaType::tm(), MetaType::tm()), MetaType::tm()));
        s.declare("plus", arrows(MetaType::tm(), MetaType::tm(), MetaType::tm()));
        s.declare_infix("plus", Infix{Fixity::infixl, 5});
        return s;
    }();
    return sig;
}

class TermGen {
public:
    explicit TermGen(std::uint32_t seed) : rng_(seed) {}

    std::mt19937& rng() { return rng_; }

    /// Restricts redex arguments to base meta-types. Unannotated lambdas passed to
    /// a redex could otherwise have binder types that no text determines.
    bool base_redexes = false;

    int below(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng_); }
    bool chance(double p) { return std::bernoulli_distribution(p)(rng_); }

    MetaType small_type()
    {
        switch (below(6)) {
        case 0: return MetaType::arrow(MetaType::tm(), MetaType::tm());
        case 1: return MetaType::tp();
        case 2: return arrows(MetaType::tm(), MetaType::tm(), MetaType::tm());
        default: return MetaType::tm();
        }
    }

    /// A meta-type ending in tm with 0..4 arguments.
    MetaType definition_type()
    {
        int n = below(5);
        MetaType t = MetaType::tm();
        for (int i = 0; i < n; ++i) t = MetaType::arrow(below(3) == 0 ? small_type() : MetaType::tm(), t);
        return t;
    }

    /// A random closed term of meta-type `ty`, possibly with redexes and
    /// eta-short subterms when `normal_only` is false.
    Term term(const MetaType& ty, int depth, bool normal_only = false)
    {
        std::vector<MetaType> ctx;
        return gen(ty, ctx, depth, normal_only);
    }

    Term gen(const MetaType& ty, std::vector<MetaType>& ctx, int depth, bool normal_only)
    {
        if (ty.is_arrow()) {
            if (normal_only || !chance(0.15)) {
                ctx.push_back(ty.domain());
                Term b = gen(ty.codomain(), ctx, depth, normal_only);
                ctx.pop_back();
                return Term::lam(ty.domain(), b, hint());
            }
        } else if (!normal_only && depth > 0 && chance(0.12)) {
            MetaType s = small_type();
            if (base_redexes && s.is_arrow()) s = MetaType::tm();
            ctx.push_back(s);
            Term b = gen(ty, ctx, depth - 1, normal_only);
            ctx.pop_back();
            return Term::app(Term::lam(s, b, hint()), gen(s, ctx, depth - 1, normal_only));
        }
        struct Head {
            Term t;
            std::vector<MetaType> args;
        };
        std::vector<Head> heads;
        auto consider = [&](const Term& h, const MetaType& hty) {
            std::vector<MetaType> args;
            MetaType cur = hty;
            while (true) {
                if (cur == ty && (args.empty() || depth > 0)) heads.push_back({h, args});
                if (!cur.is_arrow()) break;
                args.push_back(cur.domain());
                cur = cur.codomain();
            }
        };
        for (const char* n : {"c", "d", "f", "g", "h", "plus", "eq", "imp", "forall", "intty", "form", "arrow"}) {
            const ConstDecl* d = gen_signature().find(n);
            consider(Term::constant(n, d->type), d->type);
        }
        for (std::size_t i = 0; i < ctx.size(); ++i)
            consider(Term::bound(static_cast<std::uint32_t>(i)), ctx[ctx.size() - 1 - i]);
        if (heads.empty() && ty.is_arrow()) {
            ctx.push_back(ty.domain());
            Term b = gen(ty.codomain(), ctx, depth, normal_only);
            ctx.pop_back();
            return Term::lam(ty.domain(), b, hint());
        }
        // Prefer leaves as depth runs out.
        std::vector<const Head*> pick;
        for (const auto& h : heads)
            if (depth > 1 || h.args.empty()) pick.push_back(&h);
        if (pick.empty())
            for (const auto& h : heads) pick.push_back(&h);
        const Head& h = *pick[static_cast<std::size_t>(below(static_cast<int>(pick.size())))];
        std::vector<Term> args;
        for (const auto& a : h.args) args.push_back(gen(a, ctx, depth - 1, normal_only));
        return Term::apps(h.t, args);
    }

private:
    std::string hint()
    {
        static const char* names[] = {"x", "y", "Z", "c", "F", "x1", "w'"};
        return names[below(7)];
    }

    std::mt19937 rng_;
};

/// Meta-type of a well-typed term whose loose indices have the types in `ctx`.
inline MetaType type_of(const Term& t, std::vector<MetaType>& ctx)
{
    switch (t.kind()) {
    case TermKind::bound: return ctx[ctx.size() - 1 - t.index()];
    case TermKind::app: return type_of(t.fun(), ctx).codomain();
    case TermKind::lam: {
        ctx.push_back(t.type());
        MetaType b = type_of(t.body(), ctx);
        ctx.pop_back();
        return MetaType::arrow(t.type(), b);
    }
    default: return t.type();
    }
}

/// Replaces metavariables by closed values.
inline Term plug(const Term& t, const std::map<std::uint64_t, Term>& sub)
{
    switch (t.kind()) {
    case TermKind::meta: {
        auto it = sub.find(t.meta_id());
        return it == sub.end() ? t : it->second;
    }
    case TermKind::app: return Term::app(plug(t.fun(), sub), plug(t.arg(), sub));
    case TermKind::lam: return Term::lam(t.type(), plug(t.body(), sub), t.name());
    default: return t;
    }
}

/// Loose de Bruijn indices of `t` relative to depth 0.
inline void loose_indices(const Term& t, std::uint32_t depth, std::vector<std::uint32_t>& out)
{
    switch (t.kind()) {
    case TermKind::bound:
        if (t.index() >= depth) out.push_back(t.index() - depth);
        break;
    case TermKind::app:
        loose_indices(t.fun(), depth, out);
        loose_indices(t.arg(), depth, out);
        break;
    case TermKind::lam: loose_indices(t.body(), depth + 1, out); break;
    default: break;
    }
}

/// Independent arity oracle: the number of arrows at parenthesis depth zero
/// in the printed meta-type.
inline std::size_t arity_oracle(const std::string& type_text)
{
    std::size_t n = 0;
    int depth = 0;
    for (std::size_t i = 0; i < type_text.size(); ++i) {
        char ch = type_text[i];
        if (ch == '(') ++depth;
        else if (ch == ')') --depth;
        else if (depth == 0 && type_text.compare(i, 2, "->") == 0) ++n;
    }
    return n;
}

inline std::size_t leading_pis(const Term& clause)
{
    std::size_t n = 0;
    Term cur = clause;
    while (is_application_of(cur, names::pi, 1) && cur.arg().is_lam()) {
        ++n;
        cur = cur.arg().body();
    }
    return n;
}

// ---- property suites; each returns the number of failing cases ----

struct PropertyResult {
    std::size_t cases = 0;
    std::size_t failures = 0;
    std::string first_failure;

    bool ok() const { return failures == 0; }
    void fail(const std::string& what)
    {
        if (failures++ == 0) first_failure = what;
    }
};

inline PropertyResult prop_normalize_idempotent(std::size_t n, std::uint32_t seed)
{
    PropertyResult r;
    TermGen gen(seed);
    for (std::size_t i = 0; i < n; ++i) {
        MetaType ty = gen.small_type();
        Term t = gen.term(ty, 2 + gen.below(4));
        Term a = normalize(t);
        Term b = normalize(a);
        ++r.cases;
        if (!alpha_eq(a, b)) r.fail(print(t, gen_signature()));
    }
    return r;
}

inline PropertyResult prop_subst_commutes(std::size_t n, std::uint32_t seed)
{
    PropertyResult r;
    TermGen gen(seed);
    for (std::size_t i = 0; i < n; ++i) {
        MetaType dom = gen.small_type();
        MetaType cod = gen.below(2) ? MetaType::tm() : gen.small_type();
        Term lam = gen.term(MetaType::arrow(dom, cod), 2 + gen.below(3));
        if (!lam.is_lam()) continue;
        Term arg = gen.term(dom, 1 + gen.below(3));
        Term direct = normalize(instantiate(lam.body(), arg));
        Term nl = normalize(lam);
        Term via = normalize(instantiate(nl.body(), normalize(arg)));
        ++r.cases;
        if (!alpha_eq(direct, via)) r.fail(print(lam, gen_signature()) + " @ " + print(arg, gen_signature()));
    }
    return r;
}

inline PropertyResult prop_parse_print(std::size_t n, std::uint32_t seed)
{
    PropertyResult r;
    TermGen gen(seed);
    gen.base_redexes = true;
    for (std::size_t i = 0; i < n; ++i) {
        MetaType ty = gen.small_type();
        Term t = gen.term(ty, 2 + gen.below(4), gen.below(2) == 0);
        std::string text = print(t, gen_signature());
        ++r.cases;
        try {
            Term back = parse_term(text, gen_signature(), ty);
            if (!alpha_eq(back, t)) r.fail(text + "  reparsed as  " + print(back, gen_signature()));
        } catch (const std::exception& e) {
            r.fail(text + "  " + e.what());
        }
    }
    return r;
}

/// Soundness of match_pattern, and success whenever the abstracted subterm only
/// uses the bound variables passed to its metavariable.
inline PropertyResult prop_match_pattern(std::size_t n, std::uint32_t seed, std::size_t* successes = nullptr)
{
    PropertyResult r;
    TermGen gen(seed);
    Session session;
    std::size_t ok_count = 0;
    for (std::size_t i = 0; i < n; ++i) {
        MetaType ty = gen.small_type();
        Term target = normalize(gen.term(ty, 2 + gen.below(4), true));
        bool expect = true;
        std::vector<MetaType> ctx;
        std::function<Term(const Term&)> abstract = [&](const Term& t) -> Term {
            if (t.is_lam()) {
                ctx.push_back(t.type());
                Term b = abstract(t.body());
                ctx.pop_back();
                return Term::lam(t.type(), b, t.name());
            }
            if (gen.chance(0.3)) {
                MetaType sty = type_of(t, ctx);
                std::vector<std::uint32_t> chosen;
                for (std::uint32_t k = 0; k < ctx.size(); ++k)
                    if (gen.chance(0.6)) chosen.push_back(k);
                std::shuffle(chosen.begin(), chosen.end(), gen.rng());
                std::vector<std::uint32_t> used;
                loose_indices(t, 0, used);
                for (auto u : used)
                    if (std::find(chosen.begin(), chosen.end(), u) == chosen.end()) expect = false;
                MetaType mty = sty;
                for (auto it = chosen.rbegin(); it != chosen.rend(); ++it)
                    mty = MetaType::arrow(ctx[ctx.size() - 1 - *it], mty);
                std::vector<Term> args;
                for (auto k : chosen) args.push_back(Term::bound(k));
                return Term::apps(session.new_meta(mty), args);
            }
            Spine s = spine(t);
            std::vector<Term> args;
            for (const auto& a : s.args) args.push_back(abstract(a));
            return Term::apps(s.head, args);
        };
        Term pattern = normalize(abstract(target));
        ++r.cases;
        try {
            auto m = session.match_pattern(pattern, target);
            if (m) {
                ++ok_count;
                if (!alpha_beta_eq(plug(pattern, *m), target))
                    r.fail(print(pattern, gen_signature()) + " vs " + print(target, gen_signature()));
            } else if (expect) {
                r.fail("no matcher for " + print(pattern, gen_signature()) + " against " +
                       print(target, gen_signature()));
            }
        } catch (const std::exception& e) {
            r.fail(std::string("exception: ") + e.what());
        }
    }
    if (successes) *successes = ok_count;
    return r;
}

inline PropertyResult prop_eqclause_arity(std::size_t n, std::uint32_t seed)
{
    PropertyResult r;
    TermGen gen(seed);
    for (std::size_t i = 0; i < n; ++i) {
        MetaType ty = gen.definition_type();
        Term name = Term::constant("name", ty, 1);
        Term body = gen.term(ty, 2 + gen.below(3));
        Term clause = def_to_eqclause(Term::constant("form", MetaType::tp()), name, body, ty);
        ++r.cases;
        std::size_t expect = arity_oracle(ty.str());
        std::size_t got = leading_pis(clause);
        if (expect != got) r.fail(ty.str() + ": oracle " + std::to_string(expect) + ", clause " + std::to_string(got));
        Term inner = clause;
        for (std::size_t k = 0; k < got; ++k) inner = inner.arg().body();
        if (!is_application_of(inner, names::proves, 2) || !spine(inner).args[0].is_constant("def"))
            r.fail(ty.str() + ": innermost atom is not proves def (...)");
    }
    return r;
}

/// Runs randomly mutated corpus goals and checks after every run that the clause
/// store and trail are back to their size before it and every binding respects
/// metavariable scope.
inline PropertyResult prop_store_discipline(std::size_t n, std::uint32_t seed, std::map<Verdict, std::size_t>* tally = nullptr)
{
    PropertyResult r;
    TermGen gen(seed);
    std::vector<Term> pool;
    for (const char* f : {"symm_simple.hol", "symm_lemma.hol", "symm_implicit.hol", "symm_trans.hol", "and_def.hol",
                          "poly_symm.hol"})
        pool.push_back(goal_of(f));
    Session session;
    // A few stored clauses so that discipline is observed against a non-empty store.
    Registry reg = load_library(load("library_symm_assoc_elam_tab.hol"));
    check_library(session, reg);
    const std::size_t base_store = session.store_size();

    std::function<Term(const Term&, std::vector<MetaType>&, int&)> mutate =
        [&](const Term& t, std::vector<MetaType>& ctx, int& budget) -> Term {
        if (budget <= 0) return t;
        switch (t.kind()) {
        case TermKind::lam: {
            ctx.push_back(t.type());
            Term b = mutate(t.body(), ctx, budget);
            ctx.pop_back();
            return Term::lam(t.type(), b, t.name());
        }
        case TermKind::bound: {
            if (!gen.chance(0.08)) return t;
            const MetaType& ty = ctx[ctx.size() - 1 - t.index()];
            std::vector<std::uint32_t> alt;
            for (std::uint32_t k = 0; k < ctx.size(); ++k)
                if (k != t.index() && ctx[ctx.size() - 1 - k] == ty) alt.push_back(k);
            if (alt.empty()) return t;
            --budget;
            return Term::bound(alt[static_cast<std::size_t>(gen.below(static_cast<int>(alt.size())))]);
        }
        case TermKind::constant:
            if (t.is_constant("refl") && gen.chance(0.2)) {
                --budget;
                return Term::constant("def", MetaType::pf());
            }
            return t;
        case TermKind::app: {
            Spine s = spine(t);
            std::vector<Term> args;
            for (const auto& a : s.args) args.push_back(mutate(a, ctx, budget));
            if (s.head.is_constant("congr") && args.size() == 6 && gen.chance(0.2)) {
                std::swap(args[1], args[2]);
                --budget;
            }
            return Term::apps(s.head, args);
        }
        default: return t;
        }
    };

    for (std::size_t i = 0; i < n; ++i) {
        Term g = pool[static_cast<std::size_t>(gen.below(static_cast<int>(pool.size())))];
        std::vector<MetaType> ctx;
        int budget = 1 + gen.below(2);
        Term m = gen.chance(0.15) ? g : mutate(g, ctx, budget);
        std::size_t store = session.store_size(), trail = session.trail_size(), metas = session.meta_count();
        CheckReport rep = session.solve_goal(m);
        ++r.cases;
        if (tally) ++(*tally)[rep.verdict];
        if (session.store_size() != store || session.store_size() != base_store)
            r.fail("clause store not restored after " + print(m));
        else if (session.trail_size() != trail)
            r.fail("trail not restored after " + print(m));
        else if (session.meta_count() != metas)
            r.fail("metavariables leaked after " + print(m));
        else if (!session.scope_sound())
            r.fail("scope violation after " + print(m));
        else if (rep.stats.max_store_depth < rep.stats.clauses_added && rep.stats.clauses_added > 0 &&
                 rep.stats.max_store_depth == 0)
            r.fail("store depth inconsistent after " + print(m));
    }
    return r;
}

} // namespace hocheck::testing

#endif // HOCHECK_TESTS_SUPPORT_HPP
