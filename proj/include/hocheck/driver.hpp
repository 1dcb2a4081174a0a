#ifndef HOCHECK_DRIVER_HPP
#define HOCHECK_DRIVER_HPP

#include <algorithm>
#include <fstream>
#include <future>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "kernel.hpp"
#include "library.hpp"
#include "parse.hpp"
#include "transform.hpp"

namespace hocheck {

enum class Command { check, expand, package, stats, fmt };
enum class TraceLevel { quiet, summary, trace };

struct RunConfig {
    Command command = Command::check;
    std::vector<std::string> inputs;
    std::vector<std::string> libraries;
    std::string output;
    std::uint64_t step_budget = 1'000'000;
    TraceLevel trace = TraceLevel::summary;
};

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int failure = 1;
inline constexpr int error = 2;
inline constexpr int resource = 3;
} // namespace exit_code

namespace detail {

/// Combines per-statement outcomes. Static errors dominate resource errors,
/// which dominate plain check failures.
inline int worse(int a, int b)
{
    auto rank = [](int c) {
        switch (c) {
        case exit_code::error: return 3;
        case exit_code::resource: return 2;
        case exit_code::failure: return 1;
        default: return 0;
        }
    };
    return rank(a) >= rank(b) ? a : b;
}

inline int exit_for(Verdict v)
{
    switch (v) {
    case Verdict::success: return exit_code::ok;
    case Verdict::failure: return exit_code::failure;
    case Verdict::validity_error:
    case Verdict::pattern_error: return exit_code::error;
    case Verdict::resource_error: return exit_code::resource;
    }
    return exit_code::error;
}

inline std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw LibraryError("cannot read file", path);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

inline std::string where(const std::string& file, Pos p)
{
    std::string out = file.empty() ? "<input>" : file;
    if (p.line > 0) out += ":" + std::to_string(p.line) + ":" + std::to_string(p.column);
    return out;
}

inline std::string stats_line(const Stats& s)
{
    return "steps " + std::to_string(s.backchain_steps) + ", clauses " + std::to_string(s.clauses_added) +
           ", store depth " + std::to_string(s.max_store_depth);
}

inline std::string proof_stats_line(const ProofStats& s)
{
    return "shared " + std::to_string(s.shared_nodes) + ", tree " + std::to_string(s.tree_nodes) + ", lemmas " +
           std::to_string(s.lemma_count) + ", definitions " + std::to_string(s.def_count) + ", depth " +
           std::to_string(s.max_depth);
}

struct Loaded {
    Registry registry;
    Signature sig = Signature::core();
};

/// Parses the libraries in order, each seeing the declarations of the ones before.
inline Loaded load_libraries(const std::vector<std::string>& paths)
{
    Loaded out;
    for (const auto& p : paths) {
        SourceFile f;
        try {
            f = parse_file(read_file(p), out.sig, p);
        } catch (const ParseError& e) {
            throw LibraryError(std::string(error_kind_name(e.kind)) + ": " + e.what(), p, e.pos);
        }
        load_library(out.registry, f);
        out.sig = f.sig;
    }
    return out;
}

struct Outcome {
    int code = exit_code::ok;
    std::string out;
    std::string err;
};

inline void report(Outcome& o, const RunConfig& cfg, const std::string& label, const CheckReport& r)
{
    o.code = worse(o.code, exit_for(r.verdict));
    if (r.ok()) {
        if (cfg.trace != TraceLevel::quiet) o.out += label + ": ok (" + stats_line(r.stats) + ")\n";
        return;
    }
    o.err += label + ": " + verdict_name(r.verdict) + ": " + r.message + "\n";
    if (cfg.trace == TraceLevel::trace)
        for (const auto& g : r.trace) o.err += "  in " + g + "\n";
    if (cfg.trace != TraceLevel::quiet) o.out += label + ": " + verdict_name(r.verdict) + " (" + stats_line(r.stats) + ")\n";
}

inline Outcome check_file(const RunConfig& cfg, const Loaded& lib, const std::string& path)
{
    Outcome o;
    SourceFile f;
    try {
        f = parse_file(read_file(path), lib.sig, path);
    } catch (const ParseError& e) {
        o.code = exit_code::error;
        o.err = where(path, e.pos) + ": " + error_kind_name(e.kind) + ": " + e.what() + "\n";
        return o;
    }
    KernelConfig kc;
    kc.step_budget = cfg.step_budget;
    Session session(kc);
    Registry reg = lib.registry;
    LibraryReport lr = check_library(session, reg);
    for (const auto& e : lr.entries) {
        const RegistryEntry* re = reg.find(e.name);
        report(o, cfg, where(re->file, re->pos) + " " + e.name, e.report);
    }
    if (!lr.ok()) return o;
    for (const Statement& st : f.statements) {
        if (auto* s = std::get_if<Solve>(&st)) {
            report(o, cfg, where(path, s->pos), session.solve_goal(s->goal));
        } else if (auto* l = std::get_if<DefLemma>(&st)) {
            report(o, cfg, where(path, l->pos) + " " + l->name.name(), admit_entry(session, entry_of(*l, path)));
        } else if (auto* d = std::get_if<DefDefinition>(&st)) {
            report(o, cfg, where(path, d->pos) + " " + d->name.name(), admit_entry(session, entry_of(*d, path)));
        }
        if (!std::holds_alternative<Solve>(st) && o.code != exit_code::ok) break;
    }
    return o;
}

inline std::string declarations(const Signature& sig, const Registry& omit)
{
    std::string out;
    for (const auto& n : sig.user_constants()) {
        if (omit.find(n)) continue;
        out += "type " + n + " " + sig.find(n)->type.str() + ".\n";
        if (const Infix* fx = sig.infix(n))
            out += print_fixity(fx->fixity) + " " + n + " " + std::to_string(fx->precedence) + ".\n";
    }
    return out;
}

inline Outcome transform_file(const RunConfig& cfg, const Loaded& lib, const std::string& path)
{
    Outcome o;
    SourceFile f;
    try {
        f = parse_file(read_file(path), lib.sig, path);
    } catch (const ParseError& e) {
        o.code = exit_code::error;
        o.err = where(path, e.pos) + ": " + error_kind_name(e.kind) + ": " + e.what() + "\n";
        return o;
    }
    Registry reg = lib.registry;
    if (cfg.command == Command::package) {
        for (const Statement& st : f.statements) {
            if (auto* l = std::get_if<DefLemma>(&st)) reg.add(entry_of(*l, path));
            if (auto* d = std::get_if<DefDefinition>(&st)) reg.add(entry_of(*d, path));
        }
        Session session;
        LibraryReport lr = check_library(session, reg);
        if (!lr.ok()) {
            const RegistryEntry* re = reg.find(lr.failed_at);
            o.code = exit_for(lr.verdict());
            o.err = where(re->file, re->pos) + " " + lr.failed_at + ": " + verdict_name(lr.verdict()) + ": " +
                    lr.entries.back().report.message + "\n";
            return o;
        }
        o.out = declarations(f.sig, reg);
    }
    for (const Statement& st : f.statements) {
        switch (cfg.command) {
        case Command::fmt: o.out += print_statement(st, f.sig) + "\n"; break;
        case Command::expand:
            if (auto* s = std::get_if<Solve>(&st)) {
                Term g = map_goal_proofs(
                    s->goal, [](const Term& p, const std::vector<MetaType>& ctx) { return expand_lemmas(p, ctx); });
                o.out += print(g, f.sig) + ".\n";
            } else {
                o.out += print_statement(st, f.sig) + "\n";
            }
            break;
        case Command::package:
            if (auto* s = std::get_if<Solve>(&st)) {
                try {
                    o.out += print(package_goal(s->goal, reg), f.sig) + ".\n";
                } catch (const LibraryError& e) {
                    o.code = exit_code::error;
                    o.err += where(path, s->pos) + ": " + e.what() + "\n";
                }
            }
            break;
        case Command::stats:
            if (auto* s = std::get_if<Solve>(&st))
                for (const Term& p : goal_proofs(s->goal))
                    o.out += where(path, s->pos) + ": " + proof_stats_line(proof_stats(p)) + "\n";
            break;
        case Command::check: break;
        }
    }
    return o;
}

} // namespace detail

/// Runs one command. Input files are processed concurrently; their output
/// appears in input order.
inline int run(const RunConfig& cfg, std::ostream& out, std::ostream& err)
{
    detail::Loaded lib;
    try {
        lib = detail::load_libraries(cfg.libraries);
    } catch (const LibraryError& e) {
        err << detail::where(e.file, e.pos) << ": " << e.what() << "\n";
        return exit_code::error;
    }

    std::vector<std::future<detail::Outcome>> jobs;
    for (const auto& path : cfg.inputs) {
        jobs.push_back(std::async(std::launch::async, [&cfg, &lib, path] {
            try {
                return cfg.command == Command::check ? detail::check_file(cfg, lib, path)
                                                     : detail::transform_file(cfg, lib, path);
            } catch (const LibraryError& e) {
                return detail::Outcome{exit_code::error, "", detail::where(e.file.empty() ? path : e.file, e.pos) +
                                                                 ": " + e.what() + "\n"};
            } catch (const std::exception& e) {
                return detail::Outcome{exit_code::error, "", path + ": " + e.what() + "\n"};
            }
        }));
    }

    int code = exit_code::ok;
    std::string produced;
    for (auto& j : jobs) {
        detail::Outcome o = j.get();
        code = detail::worse(code, o.code);
        err << o.err;
        if (cfg.command == Command::check || cfg.command == Command::stats)
            out << o.out;
        else
            produced += o.out;
    }
    if (cfg.command == Command::expand || cfg.command == Command::package || cfg.command == Command::fmt) {
        if (code != exit_code::ok) return code;
        if (cfg.output.empty() || cfg.output == "-") {
            out << produced;
        } else {
            std::ofstream f(cfg.output, std::ios::binary);
            if (!f) {
                err << cfg.output << ": cannot write output file\n";
                return exit_code::error;
            }
            f << produced;
        }
    }
    return code;
}

} // namespace hocheck

#endif // HOCHECK_DRIVER_HPP
