#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "hocheck/driver.hpp"

int main(int argc, char** argv)
{
    using namespace hocheck;
    CLI::App app{"Proof checker for a higher-order natural deduction logic"};
    app.require_subcommand(1);

    RunConfig cfg;
    const std::map<std::string, TraceLevel> traces{
        {"quiet", TraceLevel::quiet}, {"summary", TraceLevel::summary}, {"trace", TraceLevel::trace}};

    auto add = [&](const char* name, const char* help, Command cmd, bool writes) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("inputs", cfg.inputs, "Input .hol files")->required()->check(CLI::ExistingFile);
        sub->add_option("--lib", cfg.libraries, "Library file, loaded in the order given")
            ->check(CLI::ExistingFile)
            ->allow_extra_args(false);
        sub->add_option("--budget", cfg.step_budget, "Backchaining step budget per statement")
            ->check(CLI::PositiveNumber);
        sub->add_option("--trace", cfg.trace, "Verbosity: quiet, summary or trace")
            ->transform(CLI::CheckedTransformer(traces, CLI::ignore_case));
        if (writes) sub->add_option("-o,--output", cfg.output, "Output file (stdout if omitted)");
        sub->callback([&cfg, cmd] { cfg.command = cmd; });
    };
    add("check", "Check every library entry and goal", Command::check, false);
    add("expand", "Inline every lemma_pf node", Command::expand, true);
    add("package", "Inline the library entries each proof depends on", Command::package, true);
    add("stats", "Print proof size statistics", Command::stats, false);
    add("fmt", "Parse and print back", Command::fmt, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : exit_code::error;
    }
    return run(cfg, std::cout, std::cerr);
}
