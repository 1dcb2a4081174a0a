#ifndef HOCHECK_KERNEL_HPP
#define HOCHECK_KERNEL_HPP

#include <pthread.h>

#include <algorithm>
#include <cstdint>
#include <deque>
#include <exception>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "normalize.hpp"
#include "parse.hpp"
#include "print.hpp"
#include "signature.hpp"
#include "term.hpp"
#include "typing.hpp"

namespace hocheck {

struct ValidityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct PatternError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ResourceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Verdict { success, failure, validity_error, pattern_error, resource_error };

inline const char* verdict_name(Verdict v)
{
    switch (v) {
    case Verdict::success: return "success";
    case Verdict::failure: return "failure";
    case Verdict::validity_error: return "validity error";
    case Verdict::pattern_error: return "pattern error";
    case Verdict::resource_error: return "resource error";
    }
    return "?";
}

struct Stats {
    std::uint64_t backchain_steps = 0;
    std::uint64_t clauses_added = 0;
    std::uint64_t max_store_depth = 0;
    std::uint64_t bindings = 0;
    /// Uses of each builtin rule and proof constructor.
    std::map<std::string, std::uint64_t> rules;
    /// Atoms whose proof head was a builtin rule but which reached the clause store.
    std::uint64_t builtin_fallthrough = 0;
};

struct CheckReport {
    Verdict verdict = Verdict::success;
    std::string message;
    /// Goal stack at the deepest failure, outermost first.
    std::vector<std::string> trace;
    Stats stats;

    bool ok() const { return verdict == Verdict::success; }
};

struct KernelConfig {
    std::uint64_t step_budget = 1'000'000;
    std::size_t depth_limit = 200'000;
    /// Stack reserved for each top-level solve.
    std::size_t stack_bytes = std::size_t(1) << 30;
    /// Re-verify scope soundness of every binding and store discipline after every run.
    bool audit = true;
};

namespace detail {

/// Runs `f` on a thread with a `bytes`-sized stack and rethrows its exception.
template <class F>
void run_with_stack(std::size_t bytes, F&& f)
{
    struct Ctx {
        F* fn;
        std::exception_ptr err;
    } ctx{&f, nullptr};
    auto entry = [](void* p) -> void* {
        auto* c = static_cast<Ctx*>(p);
        try {
            (*c->fn)();
        } catch (...) {
            c->err = std::current_exception();
        }
        return nullptr;
    };
    pthread_attr_t attr;
    pthread_attr_init(&attr);
    pthread_attr_setstacksize(&attr, bytes);
    pthread_t th;
    if (pthread_create(&th, &attr, entry, &ctx) != 0) {
        pthread_attr_destroy(&attr);
        f();
        return;
    }
    pthread_attr_destroy(&attr);
    pthread_join(th, nullptr);
    if (ctx.err) std::rethrow_exception(ctx.err);
}

inline bool free_in(const Term& t, std::uint32_t i)
{
    if (t.loose() <= i) return false;
    switch (t.kind()) {
    case TermKind::bound: return t.index() == i;
    case TermKind::app: return free_in(t.fun(), i) || free_in(t.arg(), i);
    case TermKind::lam: return free_in(t.body(), i + 1);
    default: return false;
    }
}

inline Term eta_contract(const Term& t)
{
    if (!t.is_lam()) return t;
    Term b = eta_contract(t.body());
    if (b.is_app() && b.arg().is_bound() && b.arg().index() == 0 && !free_in(b.fun(), 0)) return unshift(b.fun(), 1);
    return b.same(t.body()) ? t : Term::lam(t.type(), b, t.name());
}

} // namespace detail

/// Goal shapes accepted inside proofs: pi, comma, both implication arrows,
/// proves, hastype, and assump around proves.
inline bool valid_clause(const Term& g)
{
    Spine s = spine(g);
    if (!s.head.is_constant() || s.head.stamp() != 0) return false;
    const std::string& h = s.head.name();
    if (h == names::pi) return s.args.size() == 1 && s.args[0].is_lam() && valid_clause(s.args[0].body());
    if (h == names::conj || h == names::impl_fwd || h == names::impl_bwd)
        return s.args.size() == 2 && valid_clause(s.args[0]) && valid_clause(s.args[1]);
    if (h == names::proves || h == names::hastype) return s.args.size() == 2;
    if (h == names::assump) return s.args.size() == 1 && is_application_of(s.args[0], names::proves, 2);
    return false;
}

inline Term pi_const(const MetaType& a)
{
    return Term::constant(names::pi, MetaType::arrow(MetaType::arrow(a, MetaType::o()), MetaType::o()));
}

inline Term o_const(const char* name) { return Term::constant(name, Signature::core().find(name)->type); }

inline Term make_pi(const MetaType& a, Term body, std::string hint = "x")
{
    return Term::app(pi_const(a), Term::lam(a, std::move(body), std::move(hint)));
}

inline Term make_binary(const char* op, Term a, Term b) { return Term::apps(o_const(op), {std::move(a), std::move(b)}); }

/// The equality clause of a definition: one universal per argument of the name's
/// meta-type, then `proves def (eq T (name xs) (body xs))`.
inline Term def_to_eqclause(const Term& result_tp, const Term& name, const Term& body, const MetaType& type)
{
    std::vector<MetaType> doms;
    MetaType cur = type;
    while (cur.is_arrow()) {
        doms.push_back(cur.domain());
        cur = cur.codomain();
    }
    if (!cur.is_base(Base::tm))
        throw StructuralError("definition of meta-type " + type.str() + " does not end in tm");
    const auto n = static_cast<std::uint32_t>(doms.size());
    std::vector<Term> xs;
    for (std::uint32_t i = 0; i < n; ++i) xs.push_back(Term::bound(n - 1 - i));
    Term lhs = Term::apps(shift(name, n), xs);
    Term rhs = Term::apps(shift(body, n), xs);
    Term eq = Term::constant("eq", Signature::core().find("eq")->type);
    Term def = Term::constant("def", MetaType::pf());
    Term clause = make_binary(names::proves, def, Term::apps(eq, {shift(result_tp, n), lhs, rhs}));
    for (std::uint32_t i = n; i-- > 0;) clause = make_pi(doms[i], clause, "x" + std::to_string(i + 1));
    return normalize(clause);
}

/// Rewrites every `proves P A` in goal position into `hastype A form, proves P A`.
inline Term with_formula_checks(const Term& g)
{
    Spine s = spine(g);
    if (!s.head.is_constant() || s.head.stamp() != 0) return g;
    const std::string& h = s.head.name();
    if (h == names::pi && s.args.size() == 1 && s.args[0].is_lam()) {
        const Term& l = s.args[0];
        return Term::app(s.head, Term::lam(l.type(), with_formula_checks(l.body()), l.name()));
    }
    if (h == names::conj && s.args.size() == 2)
        return Term::apps(s.head, {with_formula_checks(s.args[0]), with_formula_checks(s.args[1])});
    if (h == names::impl_fwd && s.args.size() == 2) return Term::apps(s.head, {s.args[0], with_formula_checks(s.args[1])});
    if (h == names::impl_bwd && s.args.size() == 2) return Term::apps(s.head, {with_formula_checks(s.args[0]), s.args[1]});
    if (h == names::proves && s.args.size() == 2) {
        Term form = Term::constant("form", MetaType::tp());
        Term ht = make_binary(names::hastype, s.args[1], form);
        return make_binary(names::conj, ht, g);
    }
    return g;
}

namespace detail {

// The inference and typing rules of the core logic, one clause per constructor.
inline const char* const kCoreRules[][2] = {
    {"eq", "pi T\\ pi X\\ pi Y\\ hastype (eq T X Y) form <<== hastype X T, hastype Y T"},
    {"imp", "pi A\\ pi B\\ hastype (A imp B) form <<== hastype A form, hastype B form"},
    {"forall", "pi T\\ pi A\\ hastype (forall T A) form <<== pi x\\ (hastype x T ==>> hastype (A x) form)"},
    {"false", "hastype false form"},
    {"lam", "pi F\\ pi T1\\ pi T2\\ hastype (lam F) (T1 arrow T2) <<== pi x\\ (hastype x T1 ==>> hastype (F x) T2)"},
    {"app", "pi T1\\ pi F\\ pi X\\ pi T2\\ hastype (app T1 F X) T2 <<== hastype F (T1 arrow T2), hastype X T1"},
    {"mkpair", "pi X\\ pi Y\\ pi T1\\ pi T2\\ hastype (mkpair X Y) (pair T1 T2) <<== hastype X T1, hastype Y T2"},
    {"fst", "pi T2\\ pi X\\ pi T1\\ hastype (fst T2 X) T1 <<== hastype X (pair T1 T2)"},
    {"snd", "pi T1\\ pi X\\ pi T2\\ hastype (snd T1 X) T2 <<== hastype X (pair T1 T2)"},
    {"refl", "pi T\\ pi X\\ proves refl (eq T X X)"},
    {"beta", "pi T2\\ pi T1\\ pi F\\ pi X\\ proves beta (eq T2 (app T1 (lam F) X) (F X))"},
    {"fstpair", "pi T1\\ pi T2\\ pi X\\ pi Y\\ proves fstpair (eq T1 (fst T2 (mkpair X Y)) X)"},
    {"sndpair", "pi T2\\ pi T1\\ pi X\\ pi Y\\ proves sndpair (eq T2 (snd T1 (mkpair X Y)) Y)"},
    {"surjpair", "pi T1\\ pi T2\\ pi Z\\ proves surjpair (eq (pair T1 T2) (mkpair (fst T2 Z) (snd T1 Z)) Z)"},
    {"congr", "pi T\\ pi X\\ pi Z\\ pi H\\ pi P1\\ pi P2\\ proves (congr T X Z H P1 P2) (H X) <<== "
              "hastype X T, hastype Z T, proves P1 (eq T X Z), proves P2 (H Z)"},
    {"imp_i", "pi Q\\ pi A\\ pi B\\ proves (imp_i Q) (A imp B) <<== pi p\\ (assump (proves p A) ==>> proves (Q p) B)"},
    {"imp_e", "pi A\\ pi Q1\\ pi Q2\\ pi B\\ proves (imp_e A Q1 Q2) B <<== "
              "hastype A form, proves Q1 (A imp B), proves Q2 A"},
    {"forall_i", "pi Q\\ pi T\\ pi A\\ proves (forall_i Q) (forall T A) <<== "
                 "pi y\\ (hastype y T ==>> proves (Q y) (A y))"},
    {"forall_e", "pi T\\ pi A\\ pi Q\\ pi X\\ proves (forall_e T A Q X) (A X) <<== "
                 "(pi x\\ (hastype x T ==>> hastype (A x) form)), hastype X T, proves Q (forall T A)"},
};

struct CoreRules {
    std::unordered_map<std::string, Term> typing;
    std::unordered_map<std::string, Term> proof;

    static const CoreRules& get()
    {
        static const CoreRules r = [] {
            CoreRules out;
            for (const auto& [head, text] : kCoreRules) {
                Term clause = normalize(parse_term(text, Signature::core(), MetaType::o()));
                Term h = clause;
                while (is_application_of(h, names::pi, 1)) h = h.arg().body();
                if (is_application_of(h, names::impl_bwd, 2)) h = h.fun().arg();
                (spine(h).head.is_constant(names::hastype) ? out.typing : out.proof).emplace(head, clause);
            }
            return out;
        }();
        return r;
    }
};

} // namespace detail

/// A kernel session: clause store, metavariable store, eigenvariable counter and budget.
/// Single-threaded; independent sessions may run in parallel.
class Session {
public:
    explicit Session(KernelConfig cfg = {}) : cfg_(cfg), rules_(detail::CoreRules::get())
    {
        lookup_ = [this](std::uint64_t id) -> const Term* {
            if (id >= metas_.size()) return nullptr;
            const auto& m = metas_[id];
            return m.binding ? &*m.binding : nullptr;
        };
    }

    Session(const Session&) = delete;
    Session& operator=(const Session&) = delete;

    const KernelConfig& config() const { return cfg_; }
    KernelConfig& config() { return cfg_; }

    // ---- entry points ----

    /// Solves a closed goal of meta-type o. With `top_level`, the goal must be a
    /// valid clause and every goal-position `proves P A` also checks `hastype A form`.
    CheckReport solve_goal(const Term& goal, bool top_level = true)
    {
        return guarded([&] {
            if (!valid_clause(normalize(goal)))
                throw ValidityError("goal is not a valid clause: " + print(normalize(goal)));
            Term g = top_level ? with_formula_checks(goal) : goal;
            return solve(g, [] { return true; });
        });
    }

    /// Checks a library lemma and, on success, keeps its clause in the store.
    CheckReport admit_lemma(const Term& name, const Term& inference, const Term& proof)
    {
        Term clause = norm(Term::app(inference, name));
        CheckReport r = guarded([&] {
            if (!valid_clause(clause)) throw ValidityError("lemma clause is not valid: " + print(clause));
            ++stats_.rules["def_lemma"];
            return solve(Term::app(inference, proof), [] { return true; });
        });
        if (r.ok()) push_clause(clause);
        return r;
    }

    /// Checks a library definition's typing and keeps its typing and equality clauses.
    CheckReport admit_definition(const Term& result_tp, const Term& name, const Term& typeinf, const Term& body)
    {
        Term clause = norm(Term::app(typeinf, name));
        std::optional<Term> eq;
        CheckReport r = guarded([&] {
            if (!valid_clause(clause)) throw ValidityError("definition typing clause is not valid: " + print(clause));
            try {
                eq = def_to_eqclause(norm(result_tp), name, norm(body), name.type());
            } catch (const StructuralError& e) {
                throw ValidityError(e.what());
            }
            ++stats_.rules["def_definition"];
            return solve(Term::app(typeinf, body), [] { return true; });
        });
        if (r.ok()) {
            push_clause(clause);
            push_clause(*eq);
        }
        return r;
    }

    /// Miller-pattern matching of `pattern` (metavariables from new_meta) against a
    /// ground `target`. Returns the normalized value of each metavariable bound by
    /// the match, or nullopt when there is no matcher. Bindings are not kept.
    std::optional<std::map<std::uint64_t, Term>> match_pattern(const Term& pattern, const Term& target)
    {
        std::size_t mark = trail_.size();
        std::optional<std::map<std::uint64_t, Term>> out;
        try {
            if (unify(pattern, target)) {
                out.emplace();
                for (const TrailEntry& e : std::vector<TrailEntry>(trail_.begin() + mark, trail_.end()))
                    if (e.kind == TrailEntry::bind) (*out)[e.id] = norm(Term::meta(e.id, metas_[e.id].type));
            }
        } catch (...) {
            undo(mark);
            throw;
        }
        undo(mark);
        return out;
    }

    Term new_meta(const MetaType& type) { return new_meta(type, stamp_); }

    Term new_meta(const MetaType& type, std::uint64_t birth)
    {
        metas_.push_back({type, birth, std::nullopt});
        return Term::meta(metas_.size() - 1, type);
    }

    Term new_eigen(const std::string& name, const MetaType& type)
    {
        return Term::constant(name.empty() ? "x" : name, type, ++stamp_);
    }

    std::size_t store_size() const { return store_.size(); }
    std::size_t trail_size() const { return trail_.size(); }
    std::size_t meta_count() const { return metas_.size(); }
    std::uint64_t last_stamp() const { return stamp_; }
    const Stats& stats() const { return stats_; }

    /// Clauses in the store, oldest first.
    std::vector<Term> clauses() const
    {
        std::vector<Term> out;
        for (const auto& e : store_) out.push_back(e.clause);
        return out;
    }

    /// True iff every current binding mentions only eigenvariables and
    /// metavariables at least as old as the bound metavariable.
    bool scope_sound() const
    {
        for (std::size_t i = 0; i < metas_.size(); ++i)
            if (metas_[i].binding && !scope_ok(metas_[i].birth, *metas_[i].binding)) return false;
        return true;
    }

    /// Binds `id` directly (tests only; checks the scope invariant like the unifier).
    bool assign(std::uint64_t id, const Term& value) { return bind(id, value); }

    void undo(std::size_t mark)
    {
        while (trail_.size() > mark) {
            TrailEntry e = trail_.back();
            trail_.pop_back();
            if (e.kind == TrailEntry::bind)
                metas_[e.id].binding.reset();
            else
                metas_[e.id].birth = e.old_birth;
        }
    }

    Term norm(const Term& t, std::vector<MetaType> ctx = {}) const { return normalize(t, &lookup_, std::move(ctx)); }

private:
    using Cont = std::function<bool()>;

    struct MetaInfo {
        MetaType type;
        std::uint64_t birth;
        std::optional<Term> binding;
    };

    struct TrailEntry {
        enum Kind { bind, lower } kind;
        std::uint64_t id;
        std::uint64_t old_birth;
    };

    struct StoreEntry {
        Term clause;
        std::size_t depth;
    };

    class DepthGuard {
    public:
        DepthGuard(Session& s) : s_(s)
        {
            if (++s_.depth_ > s_.cfg_.depth_limit) {
                --s_.depth_;
                throw ResourceError("recursion depth limit of " + std::to_string(s_.cfg_.depth_limit) + " exceeded");
            }
        }
        ~DepthGuard() { --s_.depth_; }

    private:
        Session& s_;
    };

    template <class F>
    CheckReport guarded(F&& body)
    {
        CheckReport rep;
        const std::size_t trail0 = trail_.size(), store0 = store_.size(), metas0 = metas_.size();
        steps_ = 0;
        goal_stack_.clear();
        deepest_.clear();
        Stats before = stats_;
        bool clean = false;
        try {
            bool ok = false;
            detail::run_with_stack(cfg_.stack_bytes, [&] { ok = body(); });
            clean = true;
            rep.verdict = ok ? Verdict::success : Verdict::failure;
            if (!ok) {
                rep.message = deepest_.empty() ? "goal failed" : "cannot prove " + print(norm(deepest_.back()));
            }
        } catch (const ValidityError& e) {
            rep.verdict = Verdict::validity_error;
            rep.message = e.what();
        } catch (const PatternError& e) {
            rep.verdict = Verdict::pattern_error;
            rep.message = e.what();
        } catch (const ResourceError& e) {
            rep.verdict = Verdict::resource_error;
            rep.message = e.what();
        }
        for (const Term& g : deepest_) rep.trace.push_back(print(norm(g)));
        if (rep.verdict == Verdict::success) rep.trace.clear();
        goal_stack_.clear();
        deepest_.clear();
        undo(trail0);
        if (cfg_.audit && clean && (store_.size() != store0 || depth_ != 0))
            throw std::logic_error("kernel: clause store not restored after solving");
        depth_ = 0;
        store_.resize(store0);
        metas_.resize(metas0);
        rep.stats = stats_;
        rep.stats.backchain_steps -= before.backchain_steps;
        rep.stats.clauses_added -= before.clauses_added;
        rep.stats.bindings -= before.bindings;
        for (auto& [k, v] : rep.stats.rules) v -= before.rules.count(k) ? before.rules.at(k) : 0;
        for (auto it = rep.stats.rules.begin(); it != rep.stats.rules.end();)
            it = it->second == 0 ? rep.stats.rules.erase(it) : std::next(it);
        return rep;
    }

    void count_step()
    {
        ++stats_.backchain_steps;
        if (++steps_ > cfg_.step_budget)
            throw ResourceError("step budget of " + std::to_string(cfg_.step_budget) + " backchain steps exhausted");
    }

    // ---- clause store ----

    void push_clause(const Term& clause)
    {
        Term c = norm(clause);
        if (spine(c).head.is_meta()) throw ValidityError("clause head is a variable");
        store_.push_back({c, depth_});
        ++stats_.clauses_added;
        stats_.max_store_depth = std::max<std::uint64_t>(stats_.max_store_depth, store_.size());
    }

    // ---- solving ----

    bool solve(const Term& goal0, const Cont& k)
    {
        DepthGuard guard(*this);
        Term g = norm(goal0);
        Spine s = spine(g);
        if (!s.head.is_constant() || s.head.stamp() != 0) return false;
        const std::string& h = s.head.name();
        if (h == names::pi && s.args.size() == 1) {
            const Term& l = s.args[0];
            Term e = new_eigen(l.name(), l.type());
            return solve(instantiate(l.body(), e), k);
        }
        if (h == names::conj && s.args.size() == 2) {
            const Term right = s.args[1];
            return solve(s.args[0], [&] { return solve(right, k); });
        }
        if ((h == names::impl_fwd || h == names::impl_bwd) && s.args.size() == 2) {
            const Term& d = h == names::impl_fwd ? s.args[0] : s.args[1];
            const Term& body = h == names::impl_fwd ? s.args[1] : s.args[0];
            return with_clause(d, body, k);
        }
        if (h == names::proves || h == names::hastype || h == names::assump) return solve_atom(g, k);
        return false;
    }

    bool with_clause(const Term& d, const Term& body, const Cont& k)
    {
        push_clause(d);
        bool r = solve(body, [&] {
            StoreEntry e = store_.back();
            store_.pop_back();
            bool inner = k();
            store_.push_back(e);
            return inner;
        });
        store_.pop_back();
        return r;
    }

    struct GoalFrame {
        GoalFrame(Session& s, const Term& g) : s_(s) { s_.goal_stack_.push_back(g); }
        ~GoalFrame() { s_.goal_stack_.pop_back(); }
        Session& s_;
    };

    void note_failure()
    {
        if (goal_stack_.size() >= deepest_.size()) deepest_ = goal_stack_;
    }

    bool solve_atom(const Term& g, const Cont& k)
    {
        GoalFrame frame(*this, g);
        if (!g.has_meta()) {
            // A ground atom binds nothing visible outside, so one solution suffices.
            const std::size_t mark = trail_.size(), metas0 = metas_.size();
            bool ok = dispatch(g, [] { return true; });
            undo(mark);
            metas_.resize(metas0);
            if (!ok) {
                note_failure();
                return false;
            }
            return k();
        }
        bool ok = dispatch(g, k);
        if (!ok) note_failure();
        return ok;
    }

    bool is_rule(const std::unordered_map<std::string, Term>& table, const Term& head) const
    {
        return head.is_constant() && head.stamp() == 0 && table.count(head.name());
    }

    bool dispatch(const Term& g, const Cont& k)
    {
        Spine s = spine(g);
        const std::string& pred = s.head.name();
        if (pred == names::proves) {
            const Term& proof = s.args[0];
            const Term& formula = s.args[1];
            Spine ps = spine(proof);
            if (ps.head.is_meta()) return false; // unresolved metavariable at the proof head
            if (is_rule(rules_.proof, ps.head)) {
                ++stats_.rules[ps.head.name()];
                return backchain(g, rules_.proof.at(ps.head.name()), k);
            }
            if (ps.head.is_constant() && ps.head.stamp() == 0) {
                const std::string& c = ps.head.name();
                if (c == "lemma_pf") return check_lemma_pf(ps, formula, k);
                if (c == "def_pf") return check_def_pf(ps, formula, k);
                if (c == "elam") return check_elam(ps, formula, k);
                if (c == "extract") return check_extract(ps, formula, k);
                if (c == "extractGoal") return check_extract_goal(ps, formula, k);
            }
            ++stats_.rules["assumption"];
            Term as = Term::app(o_const(names::assump), g);
            if (from_store(as, k)) return true;
            return from_store(g, k);
        }
        if (pred == names::hastype) {
            Spine ts = spine(s.args[0]);
            if (is_rule(rules_.typing, ts.head)) {
                ++stats_.rules["hastype " + ts.head.name()];
                const std::size_t mark = trail_.size();
                if (backchain(g, rules_.typing.at(ts.head.name()), k)) return true;
                undo(mark);
            }
            return from_store(g, k);
        }
        return from_store(g, k); // assump
    }

    bool from_store(const Term& g, const Cont& k)
    {
        for (std::size_t i = store_.size(); i-- > 0;) {
            if (i >= store_.size()) continue;
            Term clause = store_[i].clause;
            if (!could_match(g, clause)) continue;
            const std::size_t mark = trail_.size();
            if (backchain(g, clause, k)) return true;
            undo(mark);
        }
        return false;
    }

    /// Cheap filter: the clause has a head with the goal's predicate.
    static bool could_match(const Term& g, const Term& clause)
    {
        Term c = clause;
        for (;;) {
            Spine s = spine(c);
            if (!s.head.is_constant() || s.head.stamp() != 0) return true;
            const std::string& h = s.head.name();
            if (h == names::pi && s.args.size() == 1 && s.args[0].is_lam()) {
                c = s.args[0].body();
                continue;
            }
            if (h == names::conj) return true;
            if (h == names::impl_bwd && s.args.size() == 2) {
                c = s.args[0];
                continue;
            }
            if (h == names::impl_fwd && s.args.size() == 2) {
                c = s.args[1];
                continue;
            }
            return spine(g).head.name() == h;
        }
    }

    bool backchain(const Term& g, const Term& clause0, const Cont& k)
    {
        DepthGuard guard(*this);
        count_step();
        Term clause = norm(clause0);
        Spine s = spine(clause);
        if (s.head.is_constant() && s.head.stamp() == 0) {
            const std::string& h = s.head.name();
            if (h == names::pi && s.args.size() == 1) {
                const Term& l = s.args[0];
                Term m = new_meta(l.type());
                return backchain(g, instantiate(l.body(), m), k);
            }
            if (h == names::conj && s.args.size() == 2) {
                const std::size_t mark = trail_.size();
                if (backchain(g, s.args[0], k)) return true;
                undo(mark);
                return backchain(g, s.args[1], k);
            }
            if ((h == names::impl_bwd || h == names::impl_fwd) && s.args.size() == 2) {
                const Term head = h == names::impl_bwd ? s.args[0] : s.args[1];
                const Term body = h == names::impl_bwd ? s.args[1] : s.args[0];
                return backchain(g, head, [&] { return solve(body, k); });
            }
        }
        const std::size_t mark = trail_.size();
        if (unify(g, clause) && k()) return true;
        undo(mark);
        return false;
    }

    // ---- proof constructors for lemmas, definitions and implicit arguments ----

    static MetaType instance_of(const Term& c)
    {
        auto a = poly_instance(c);
        if (!a || !a->is_ground()) throw ValidityError("'" + c.name() + "' has no resolved meta-type instance");
        return *a;
    }

    bool check_lemma_pf(const Spine& ps, const Term& formula, const Cont& k)
    {
        ++stats_.rules["lemma_pf"];
        if (ps.args.size() != 3) return false;
        const MetaType a = instance_of(ps.head);
        const Term& inference = ps.args[0];
        const Term& lemma = ps.args[1];
        const Term& rest = ps.args[2];
        Term probe = new_eigen("Name", a);
        Term probe_clause = norm(Term::app(inference, probe));
        if (!valid_clause(probe_clause)) throw ValidityError("lemma clause is not valid: " + print(probe_clause));
        return solve(Term::app(inference, lemma), [&] {
            Term name = new_eigen(rest.is_lam() ? rest.name() : "lemma", a);
            Term goal = make_binary(names::proves, Term::app(rest, name), formula);
            return with_clause(Term::app(inference, name), goal, k);
        });
    }

    bool check_def_pf(const Spine& ps, const Term& formula, const Cont& k)
    {
        ++stats_.rules["def_pf"];
        if (ps.args.size() != 4) return false;
        const MetaType a = instance_of(ps.head);
        const Term& result_tp = ps.args[0];
        const Term& typeinf = ps.args[1];
        const Term& body = ps.args[2];
        const Term& rest = ps.args[3];
        Term name = new_eigen(rest.is_lam() ? rest.name() : "definition", a);
        Term type_clause = norm(Term::app(typeinf, name));
        if (!valid_clause(type_clause))
            throw ValidityError("definition typing clause is not valid: " + print(type_clause));
        Term eq;
        try {
            eq = def_to_eqclause(norm(result_tp), name, norm(body), a);
        } catch (const StructuralError& e) {
            throw ValidityError(e.what());
        }
        return solve(Term::app(typeinf, body), [&] {
            Term goal = make_binary(names::proves, Term::app(rest, name), formula);
            Term inner = make_binary(names::impl_fwd, eq, goal);
            return with_clause(type_clause, inner, k);
        });
    }

    bool check_elam(const Spine& ps, const Term& formula, const Cont& k)
    {
        ++stats_.rules["elam"];
        if (ps.args.size() != 1) return false;
        const MetaType a = instance_of(ps.head);
        if (!a.is_base(Base::tp) && !a.is_base(Base::tm))
            throw ValidityError("elam may only bind variables of meta-type tp or tm");
        Term b = new_meta(a);
        return solve(make_binary(names::proves, Term::app(ps.args[0], b), formula), k);
    }

    bool check_extract(const Spine& ps, const Term& formula, const Cont& k)
    {
        ++stats_.rules["extract"];
        if (ps.args.size() != 2) return false;
        const std::size_t mark = trail_.size();
        if (unify(ps.args[0], formula) && solve(make_binary(names::proves, ps.args[1], formula), k)) return true;
        undo(mark);
        return false;
    }

    bool check_extract_goal(const Spine& ps, const Term& formula, const Cont& k)
    {
        ++stats_.rules["extractGoal"];
        if (ps.args.size() != 2) return false;
        Term g = norm(ps.args[0]);
        if (!valid_clause(g)) throw ValidityError("extractGoal goal is not a valid clause: " + print(g));
        const Term proof = ps.args[1];
        return solve(g, [&] { return solve(make_binary(names::proves, proof, formula), k); });
    }

    // ---- pattern unification ----

    enum class Res { ok, fail, defer };

    struct Problem {
        std::vector<MetaType> ctx;
        Term a, b;
    };

    struct FlexArg {
        bool is_bound;
        std::uint32_t index; // ctx-relative de Bruijn index when bound
        Term eigen;
        MetaType type;

        bool same(const FlexArg& o) const
        {
            return is_bound == o.is_bound && (is_bound ? index == o.index : eigen.stamp() == o.eigen.stamp());
        }
    };

    bool scope_ok(std::uint64_t birth, const Term& v) const
    {
        bool ok = true;
        std::vector<Term> stack{v};
        while (!stack.empty() && ok) {
            Term t = stack.back();
            stack.pop_back();
            switch (t.kind()) {
            case TermKind::constant:
                if (t.stamp() > birth) ok = false;
                break;
            case TermKind::meta: {
                const auto& m = metas_[t.meta_id()];
                if (m.binding)
                    stack.push_back(*m.binding);
                else if (m.birth > birth)
                    ok = false;
                break;
            }
            case TermKind::app:
                stack.push_back(t.fun());
                stack.push_back(t.arg());
                break;
            case TermKind::lam: stack.push_back(t.body()); break;
            default: break;
            }
        }
        return ok;
    }

    bool bind(std::uint64_t id, const Term& value)
    {
        if (metas_[id].binding) throw std::logic_error("kernel: rebinding a metavariable");
        if (!value.closed()) throw std::logic_error("kernel: binding with loose bound variables");
        if (cfg_.audit && !scope_ok(metas_[id].birth, value)) return false;
        metas_[id].binding = value;
        trail_.push_back({TrailEntry::bind, id, 0});
        ++stats_.bindings;
        return true;
    }

    void lower_birth(std::uint64_t id, std::uint64_t birth)
    {
        if (metas_[id].birth <= birth) return;
        trail_.push_back({TrailEntry::lower, id, metas_[id].birth});
        metas_[id].birth = birth;
    }

    static MetaType ctx_type(const std::vector<MetaType>& ctx, std::uint32_t i) { return ctx[ctx.size() - 1 - i]; }

    /// Pattern arguments of a flexible term, or nullopt when they are not distinct
    /// local variables or eigenvariables younger than the metavariable.
    std::optional<std::vector<FlexArg>> pattern_args(const std::vector<MetaType>& ctx, std::uint64_t birth,
                                                     const std::vector<Term>& args) const
    {
        std::vector<FlexArg> out;
        for (const Term& a0 : args) {
            Term a = detail::eta_contract(a0);
            FlexArg f{false, 0, Term(), MetaType::o()};
            if (a.is_bound() && a.index() < ctx.size()) {
                f = {true, a.index(), Term(), ctx_type(ctx, a.index())};
            } else if (a.is_eigen() && a.stamp() > birth) {
                f = {false, 0, a, a.type()};
            } else {
                return std::nullopt;
            }
            for (const FlexArg& g : out)
                if (g.same(f)) return std::nullopt;
            out.push_back(f);
        }
        return out;
    }

    static Term wrap_lams(Term body, const std::vector<FlexArg>& args)
    {
        for (std::size_t i = args.size(); i-- > 0;) body = Term::lam(args[i].type, body, "x");
        return body;
    }

    /// Rewrites `t` (at local binder depth d) for use as the body of a solution of a
    /// metavariable with pattern arguments `args` and the given birth.
    Res abstract_for(const Term& t, std::uint32_t d, const std::vector<FlexArg>& args, std::uint64_t mid,
                     std::uint64_t birth, Term& out)
    {
        const auto n = static_cast<std::uint32_t>(args.size());
        switch (t.kind()) {
        case TermKind::bound: {
            if (t.index() < d) {
                out = t;
                return Res::ok;
            }
            const std::uint32_t c = t.index() - d;
            for (std::uint32_t i = 0; i < n; ++i)
                if (args[i].is_bound && args[i].index == c) {
                    out = Term::bound(d + n - 1 - i);
                    return Res::ok;
                }
            return Res::fail;
        }
        case TermKind::constant: {
            if (t.stamp() == 0) {
                out = t;
                return Res::ok;
            }
            for (std::uint32_t i = 0; i < n; ++i)
                if (!args[i].is_bound && args[i].eigen.stamp() == t.stamp()) {
                    out = Term::bound(d + n - 1 - i);
                    return Res::ok;
                }
            if (t.stamp() > birth) return Res::fail;
            out = t;
            return Res::ok;
        }
        case TermKind::lam: {
            Term b;
            Res r = abstract_for(t.body(), d + 1, args, mid, birth, b);
            if (r != Res::ok) return r;
            out = Term::lam(t.type(), b, t.name());
            return Res::ok;
        }
        case TermKind::app:
        case TermKind::meta: {
            Spine s = spine(t);
            if (s.head.is_meta()) return abstract_flex(s, d, args, mid, birth, out);
            Term head;
            Res r = abstract_for(s.head, d, args, mid, birth, head);
            if (r != Res::ok) return r;
            std::vector<Term> outs;
            for (const Term& a : s.args) {
                Term x;
                r = abstract_for(a, d, args, mid, birth, x);
                if (r != Res::ok) return r;
                outs.push_back(x);
            }
            out = Term::apps(head, outs);
            return Res::ok;
        }
        }
        return Res::fail;
    }

    Res abstract_flex(const Spine& s, std::uint32_t d, const std::vector<FlexArg>& args, std::uint64_t mid,
                      std::uint64_t birth, Term& out)
    {
        const std::uint64_t nid = s.head.meta_id();
        if (nid == mid) return Res::fail; // occurs check
        std::vector<Term> outs(s.args.size());
        std::vector<bool> keep(s.args.size(), true);
        bool prune = false;
        for (std::size_t i = 0; i < s.args.size(); ++i) {
            Res r = abstract_for(s.args[i], d, args, mid, birth, outs[i]);
            if (r == Res::defer) return r;
            if (r == Res::fail) {
                Term v = detail::eta_contract(s.args[i]);
                if (!(v.is_bound() || v.is_eigen())) return Res::defer;
                keep[i] = false;
                prune = true;
            }
        }
        lower_birth(nid, birth);
        Term head = s.head;
        if (prune) {
            // Drop the arguments the solution cannot mention.
            MetaType nt = metas_[nid].type;
            std::vector<MetaType> doms;
            for (std::size_t i = 0; i < s.args.size(); ++i, nt = nt.codomain()) doms.push_back(nt.domain());
            MetaType pt = nt;
            for (std::size_t i = s.args.size(); i-- > 0;)
                if (keep[i]) pt = MetaType::arrow(doms[i], pt);
            Term p = new_meta(pt, metas_[nid].birth);
            const auto m = static_cast<std::uint32_t>(s.args.size());
            std::vector<Term> kept_vars;
            for (std::uint32_t i = 0; i < m; ++i)
                if (keep[i]) kept_vars.push_back(Term::bound(m - 1 - i));
            Term value = Term::apps(p, kept_vars);
            for (std::size_t i = m; i-- > 0;) value = Term::lam(doms[i], value, "x");
            if (!bind(nid, norm(value))) return Res::fail;
            head = p;
            std::vector<Term> kept;
            for (std::size_t i = 0; i < s.args.size(); ++i)
                if (keep[i]) kept.push_back(outs[i]);
            outs = kept;
        }
        out = Term::apps(head, outs);
        return Res::ok;
    }

    Res flex_rigid(const Problem& p, const Spine& flex, const Term& other)
    {
        const std::uint64_t id = flex.head.meta_id();
        auto args = pattern_args(p.ctx, metas_[id].birth, flex.args);
        if (!args) return Res::defer;
        Term body;
        Res r = abstract_for(other, 0, *args, id, metas_[id].birth, body);
        if (r != Res::ok) return r;
        return bind(id, norm(wrap_lams(body, *args))) ? Res::ok : Res::fail;
    }

    Res flex_flex(const Problem& p, const Spine& fa, const Spine& fb)
    {
        const std::uint64_t ia = fa.head.meta_id(), ib = fb.head.meta_id();
        auto aa = pattern_args(p.ctx, metas_[ia].birth, fa.args);
        auto ab = pattern_args(p.ctx, metas_[ib].birth, fb.args);
        if (!aa || !ab) {
            if (ia != ib) {
                // One side may still be a pattern; solving it is the most general step.
                if (aa) return flex_rigid(p, fa, Term::apps(fb.head, fb.args));
                if (ab) return flex_rigid(p, fb, Term::apps(fa.head, fa.args));
            }
            return Res::defer;
        }
        const MetaType target = metas_[ia].type.strip(aa->size());
        if (ia == ib) {
            std::vector<std::uint32_t> kept;
            for (std::uint32_t i = 0; i < aa->size(); ++i)
                if ((*aa)[i].same((*ab)[i])) kept.push_back(i);
            if (kept.size() == aa->size()) return Res::ok;
            MetaType pt = target;
            for (std::size_t j = kept.size(); j-- > 0;) pt = MetaType::arrow((*aa)[kept[j]].type, pt);
            Term q = new_meta(pt, metas_[ia].birth);
            const auto n = static_cast<std::uint32_t>(aa->size());
            std::vector<Term> vars;
            for (std::uint32_t i : kept) vars.push_back(Term::bound(n - 1 - i));
            return bind(ia, norm(wrap_lams(Term::apps(q, vars), *aa))) ? Res::ok : Res::fail;
        }
        // Distinct metavariables: a variable one side receives as an argument but the
        // other could mention directly makes the intersection incomplete.
        auto visible = [&](const FlexArg& f, std::uint64_t birth) { return !f.is_bound && f.eigen.stamp() <= birth; };
        std::vector<std::pair<std::uint32_t, std::uint32_t>> common;
        for (std::uint32_t i = 0; i < aa->size(); ++i) {
            bool found = false;
            for (std::uint32_t j = 0; j < ab->size(); ++j)
                if ((*aa)[i].same((*ab)[j])) {
                    common.push_back({i, j});
                    found = true;
                }
            if (!found && visible((*aa)[i], metas_[ib].birth)) return Res::defer;
        }
        for (std::uint32_t j = 0; j < ab->size(); ++j) {
            bool found = false;
            for (auto& c : common)
                if (c.second == j) found = true;
            if (!found && visible((*ab)[j], metas_[ia].birth)) return Res::defer;
        }
        MetaType pt = target;
        for (std::size_t c = common.size(); c-- > 0;) pt = MetaType::arrow((*aa)[common[c].first].type, pt);
        Term q = new_meta(pt, std::min(metas_[ia].birth, metas_[ib].birth));
        const auto na = static_cast<std::uint32_t>(aa->size()), nb = static_cast<std::uint32_t>(ab->size());
        std::vector<Term> va, vb;
        for (auto& c : common) {
            va.push_back(Term::bound(na - 1 - c.first));
            vb.push_back(Term::bound(nb - 1 - c.second));
        }
        if (!bind(ia, norm(wrap_lams(Term::apps(q, va), *aa)))) return Res::fail;
        if (!bind(ib, norm(wrap_lams(Term::apps(q, vb), *ab)))) return Res::fail;
        return Res::ok;
    }

    Res step(const Problem& p, std::deque<Problem>& work)
    {
        Term a = norm(p.a, p.ctx);
        Term b = norm(p.b, p.ctx);
        if (a.is_lam() && b.is_lam()) {
            std::vector<MetaType> ctx = p.ctx;
            ctx.push_back(a.type());
            work.push_front({std::move(ctx), a.body(), b.body()});
            return Res::ok;
        }
        if (a.is_lam() || b.is_lam()) return Res::fail;
        Spine sa = spine(a), sb = spine(b);
        const bool fa = sa.head.is_meta(), fb = sb.head.is_meta();
        if (fa && fb) return flex_flex(p, sa, sb);
        if (fa) return flex_rigid(p, sa, b);
        if (fb) return flex_rigid(p, sb, a);
        const Term &ha = sa.head, &hb = sb.head;
        if (ha.kind() != hb.kind()) return Res::fail;
        if (ha.is_bound() ? ha.index() != hb.index() : (ha.stamp() != hb.stamp() || ha.name() != hb.name()))
            return Res::fail;
        if (sa.args.size() != sb.args.size()) return Res::fail;
        for (std::size_t i = sa.args.size(); i-- > 0;) work.push_front({p.ctx, sa.args[i], sb.args[i]});
        return Res::ok;
    }

    /// Unifies two closed terms. Non-pattern problems wait until other problems
    /// instantiate them; any left over raise a pattern error.
    bool unify(const Term& a, const Term& b)
    {
        std::deque<Problem> work{{{}, a, b}};
        std::vector<Problem> deferred;
        for (;;) {
            bool progress = false;
            while (!work.empty()) {
                Problem p = std::move(work.front());
                work.pop_front();
                Res r = step(p, work);
                if (r == Res::fail) return false;
                if (r == Res::defer)
                    deferred.push_back(std::move(p));
                else
                    progress = true;
            }
            if (deferred.empty()) return true;
            if (!progress) {
                const Problem& p = deferred.front();
                throw PatternError("not a higher-order pattern: " + describe(p.a, p.ctx) + " = " +
                                   describe(p.b, p.ctx));
            }
            for (auto& p : deferred) work.push_back(std::move(p));
            deferred.clear();
        }
    }

    std::string describe(const Term& t, const std::vector<MetaType>& ctx) const
    {
        Term c = norm(t, ctx);
        for (std::size_t i = 0; i < ctx.size(); ++i) c = Term::lam(ctx[ctx.size() - 1 - i], c, "v");
        return print(c);
    }

    KernelConfig cfg_;
    const detail::CoreRules& rules_;
    MetaLookup lookup_;
    std::vector<MetaInfo> metas_;
    std::vector<TrailEntry> trail_;
    std::vector<StoreEntry> store_;
    std::uint64_t stamp_ = 0;
    std::uint64_t steps_ = 0;
    std::size_t depth_ = 0;
    Stats stats_;
    std::vector<Term> goal_stack_;
    std::vector<Term> deepest_;
};

} // namespace hocheck

#endif // HOCHECK_KERNEL_HPP
