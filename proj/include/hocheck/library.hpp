#ifndef HOCHECK_LIBRARY_HPP
#define HOCHECK_LIBRARY_HPP

#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "kernel.hpp"
#include "parse.hpp"

namespace hocheck {

struct LibraryError : std::runtime_error {
    LibraryError(const std::string& msg, std::string file_ = {}, Pos pos_ = {})
        : std::runtime_error(msg), file(std::move(file_)), pos(pos_)
    {
    }

    std::string file;
    Pos pos;
};

struct RegistryEntry {
    enum class Kind { lemma, definition };

    Kind kind;
    Term name;      // the declared constant
    Term result_tp; // definitions only
    Term inference; // clause template, or the typing template of a definition
    Term body;      // proof template, or the definition body
    std::string file;
    Pos pos;
    /// Registry names this entry mentions that are defined at or after it.
    std::vector<std::string> forward_refs;
    bool checked = false;

    const std::string& id() const { return name.name(); }
};

/// Named lemmas and definitions in file order.
class Registry {
public:
    const std::vector<RegistryEntry>& entries() const { return entries_; }
    std::vector<RegistryEntry>& entries() { return entries_; }
    bool empty() const { return entries_.empty(); }
    std::size_t size() const { return entries_.size(); }

    const RegistryEntry* find(const std::string& name) const
    {
        auto it = index_.find(name);
        return it == index_.end() ? nullptr : &entries_[it->second];
    }

    std::size_t position(const std::string& name) const { return index_.at(name); }

    void add(RegistryEntry e)
    {
        if (index_.count(e.id())) throw LibraryError("duplicate library entry '" + e.id() + "'", e.file, e.pos);
        index_.emplace(e.id(), entries_.size());
        entries_.push_back(std::move(e));
        refresh_forward_refs();
    }

    /// Every registry name mentioned by `t`.
    std::set<std::string> mentioned(const Term& t) const
    {
        std::set<std::string> out;
        for_each_constant(t, [&](const Term& c) {
            if (c.stamp() == 0 && index_.count(c.name())) out.insert(c.name());
        });
        return out;
    }

    std::set<std::string> mentioned(const RegistryEntry& e) const
    {
        std::set<std::string> out = mentioned(e.inference);
        for (const auto& n : mentioned(e.body)) out.insert(n);
        if (e.result_tp)
            for (const auto& n : mentioned(e.result_tp)) out.insert(n);
        return out;
    }

private:
    void refresh_forward_refs()
    {
        for (std::size_t i = 0; i < entries_.size(); ++i) {
            entries_[i].forward_refs.clear();
            for (const auto& n : mentioned(entries_[i]))
                if (index_.at(n) >= i) entries_[i].forward_refs.push_back(n);
        }
    }

    std::vector<RegistryEntry> entries_;
    std::map<std::string, std::size_t> index_;
};

inline RegistryEntry entry_of(const DefLemma& d, const std::string& file)
{
    return {RegistryEntry::Kind::lemma, d.name, Term(), d.inference, d.proof, file, d.pos, {}, false};
}

inline RegistryEntry entry_of(const DefDefinition& d, const std::string& file)
{
    return {RegistryEntry::Kind::definition, d.name, d.result_tp, d.typeinf, d.body, file, d.pos, {}, false};
}

/// Adds the lemma and definition statements of a library file. Library files may
/// only contain declarations and library entries.
inline void load_library(Registry& reg, const SourceFile& file)
{
    for (const Statement& st : file.statements) {
        if (auto* l = std::get_if<DefLemma>(&st))
            reg.add(entry_of(*l, file.path));
        else if (auto* d = std::get_if<DefDefinition>(&st))
            reg.add(entry_of(*d, file.path));
        else if (auto* s = std::get_if<Solve>(&st))
            throw LibraryError("library files may not contain goals", file.path, s->pos);
    }
}

inline Registry load_library(const SourceFile& file)
{
    Registry reg;
    load_library(reg, file);
    return reg;
}

struct EntryReport {
    std::string name;
    CheckReport report;
};

struct LibraryReport {
    std::vector<EntryReport> entries;
    /// Name of the first entry that did not check; empty on success.
    std::string failed_at;

    bool ok() const { return failed_at.empty(); }
    Verdict verdict() const { return ok() ? Verdict::success : entries.back().report.verdict; }
};

/// Checks one entry in `session` and, on success, keeps its clauses there.
inline CheckReport admit_entry(Session& session, const RegistryEntry& e)
{
    CheckReport r = e.kind == RegistryEntry::Kind::lemma
                        ? session.admit_lemma(e.name, e.inference, e.body)
                        : session.admit_definition(e.result_tp, e.name, e.inference, e.body);
    if (!e.forward_refs.empty()) {
        std::string refs;
        for (const auto& n : e.forward_refs) refs += (refs.empty() ? "'" : ", '") + n + "'";
        std::string note = "refers to " + refs + " which is not defined before it";
        if (r.ok()) {
            r.verdict = Verdict::failure;
            r.message = note;
        } else {
            r.message = note + "; " + r.message;
        }
    }
    return r;
}

/// Checks every entry in order, each in the environment of the entries before it.
/// Stops at the first entry that does not check.
inline LibraryReport check_library(Session& session, Registry& reg)
{
    LibraryReport out;
    for (RegistryEntry& e : reg.entries()) {
        CheckReport r = admit_entry(session, e);
        out.entries.push_back({e.id(), r});
        if (!r.ok()) {
            out.failed_at = e.id();
            break;
        }
        e.checked = true;
    }
    return out;
}

/// Every registry name `t` depends on, directly or through other entries.
inline std::set<std::string> dependency_closure(const Term& t, const Registry& reg)
{
    std::set<std::string> seen;
    std::vector<std::string> work;
    for (const auto& n : reg.mentioned(t)) work.push_back(n);
    while (!work.empty()) {
        std::string n = work.back();
        work.pop_back();
        if (!seen.insert(n).second) continue;
        for (const auto& m : reg.mentioned(*reg.find(n)))
            if (!seen.count(m)) work.push_back(m);
    }
    return seen;
}

inline Term lemma_pf_at(const MetaType& a)
{
    using M = MetaType;
    return Term::constant("lemma_pf", arrows(M::arrow(a, M::o()), a, M::arrow(a, M::pf()), M::pf()));
}

inline Term def_pf_at(const MetaType& a)
{
    using M = MetaType;
    return Term::constant("def_pf", arrows(M::tp(), M::arrow(a, M::o()), a, M::arrow(a, M::pf()), M::pf()));
}

/// Wraps `proof` in lemma_pf and def_pf nodes for every registry entry it depends
/// on (definitions outermost, each group in registry order) so that the result
/// mentions no registry name. `proof` may have loose bound variables.
inline Term package_proof(const Term& proof, const Registry& reg)
{
    std::set<std::string> deps = dependency_closure(proof, reg);
    for (const auto& n : deps)
        if (!reg.find(n)->checked) throw LibraryError("library entry '" + n + "' has not been checked");
    std::vector<const RegistryEntry*> defs, lemmas;
    for (const RegistryEntry& e : reg.entries())
        if (deps.count(e.id())) (e.kind == RegistryEntry::Kind::definition ? defs : lemmas).push_back(&e);
    Term body = proof;
    auto wrap = [&](const RegistryEntry& e) {
        Term rest = abstract_over(body, e.name);
        const MetaType& a = e.name.type();
        if (e.kind == RegistryEntry::Kind::lemma)
            body = Term::apps(lemma_pf_at(a), {e.inference, e.body, rest});
        else
            body = Term::apps(def_pf_at(a), {e.result_tp, e.inference, e.body, rest});
    };
    for (auto it = lemmas.rbegin(); it != lemmas.rend(); ++it) wrap(**it);
    for (auto it = defs.rbegin(); it != defs.rend(); ++it) wrap(**it);
    return body;
}

/// Applies `f` to every proof in goal position (the first argument of a `proves`
/// atom reached through pi, comma and the conclusion side of implications).
/// `f` receives the proof and the binder meta-types enclosing it.
template <class F>
Term map_goal_proofs(const Term& g, F&& f, std::vector<MetaType>& ctx)
{
    Spine s = spine(g);
    if (!s.head.is_constant() || s.head.stamp() != 0) return g;
    const std::string& h = s.head.name();
    if (h == names::pi && s.args.size() == 1 && s.args[0].is_lam()) {
        const Term& l = s.args[0];
        ctx.push_back(l.type());
        Term b = map_goal_proofs(l.body(), f, ctx);
        ctx.pop_back();
        return Term::app(s.head, Term::lam(l.type(), b, l.name()));
    }
    if (h == names::conj && s.args.size() == 2)
        return Term::apps(s.head, {map_goal_proofs(s.args[0], f, ctx), map_goal_proofs(s.args[1], f, ctx)});
    if (h == names::impl_fwd && s.args.size() == 2)
        return Term::apps(s.head, {s.args[0], map_goal_proofs(s.args[1], f, ctx)});
    if (h == names::impl_bwd && s.args.size() == 2)
        return Term::apps(s.head, {map_goal_proofs(s.args[0], f, ctx), s.args[1]});
    if (h == names::proves && s.args.size() == 2) return Term::apps(s.head, {f(s.args[0], ctx), s.args[1]});
    return g;
}

template <class F>
Term map_goal_proofs(const Term& g, F&& f)
{
    std::vector<MetaType> ctx;
    return map_goal_proofs(g, f, ctx);
}

/// Proofs in goal position, in order.
inline std::vector<Term> goal_proofs(const Term& g)
{
    std::vector<Term> out;
    map_goal_proofs(g, [&](const Term& p, const std::vector<MetaType>&) {
        out.push_back(p);
        return p;
    });
    return out;
}

/// Packages every proof of a goal. Registry names may occur only in proofs.
inline Term package_goal(const Term& goal, const Registry& reg)
{
    Term stripped = map_goal_proofs(goal, [](const Term&, const std::vector<MetaType>&) {
        return Term::constant("refl", MetaType::pf());
    });
    auto names_in_goal = reg.mentioned(stripped);
    if (!names_in_goal.empty())
        throw LibraryError("goal mentions library name '" + *names_in_goal.begin() +
                           "' outside a proof; it cannot be packaged");
    return map_goal_proofs(goal, [&](const Term& p, const std::vector<MetaType>&) { return package_proof(p, reg); });
}

} // namespace hocheck

#endif // HOCHECK_LIBRARY_HPP
