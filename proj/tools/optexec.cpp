// Command-line front end: scenario-based optimal trade execution under
// joint price and volume uncertainty.

#include <CLI11.hpp>
#include <iostream>
#include <string>

#include "optexec/commands.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Risk-aware optimal trade execution engine"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags may follow the subcommand

    std::string config_path;
    std::string out_dir = "out";
    std::string case_override;
    std::size_t paths = 0;
    std::uint64_t seed = 0;
    bool seed_set = false;

    app.add_option("--config", config_path, "JSON configuration file");
    app.add_option("--out", out_dir, "output directory")->capture_default_str();
    app.add_option("--case", case_override, "market preset case: a or b")
        ->check(CLI::IsMember({"a", "b"}));
    app.add_option("--paths", paths, "override the solve-set path count");
    app.add_option("--seed", seed, "override the solve-set seed")
        ->each([&](const std::string&) { seed_set = true; });

    auto* viability = app.add_subcommand("viability", "check convexity and market viability");
    auto* solve = app.add_subcommand("solve", "solve one model over its risk-aversion grid");
    std::string model = "cvar";
    solve->add_option("model", model, "mv or cvar")->check(CLI::IsMember({"mv", "cvar"}));
    auto* table = app.add_subcommand("table", "build a performance table");
    std::string which = "2b";
    table->add_option("which", which, "2a, 2b or 3")->check(CLI::IsMember({"2a", "2b", "3"}));
    auto* compare = app.add_subcommand("compare",
                                       "compare mean-CVaR against mean-variance with recourse");
    bool dump_costs = false;
    compare->add_flag("--dump-costs", dump_costs, "also write the raw cost samples as CSV");
    auto* delta = app.add_subcommand("strategy-delta",
                                     "strategy difference: joint vs price-only uncertainty");
    auto* gen = app.add_subcommand("gen-scenarios", "generate and store a scenario batch");

    CLI11_PARSE(app, argc, argv);

    try {
        optexec::Config cfg =
            config_path.empty() ? optexec::Config{} : optexec::load_config(config_path);
        if (config_path.empty()) {
            cfg.market = optexec::make_preset(cfg.run.market_case);
            cfg.market.alpha = cfg.run.alpha;
        }
        if (!case_override.empty()) optexec::apply_case_override(cfg, case_override[0]);
        if (paths > 0) cfg.scenarios.paths = paths;
        if (seed_set) cfg.scenarios.seed = seed;

        if (viability->parsed()) return optexec::commands::cmd_viability(cfg, std::cout);
        if (solve->parsed()) return optexec::commands::cmd_solve(cfg, model, out_dir, std::cout);
        if (table->parsed()) return optexec::commands::cmd_table(cfg, which, out_dir, std::cout);
        if (compare->parsed())
            return optexec::commands::cmd_compare(cfg, out_dir, std::cout, dump_costs);
        if (delta->parsed()) return optexec::commands::cmd_strategy_delta(cfg, out_dir, std::cout);
        if (gen->parsed()) return optexec::commands::cmd_gen_scenarios(cfg, out_dir, std::cout);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
