#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "fedsim/errors.hpp"
#include "fedsim/experiment.hpp"

int main(int argc, char** argv) {
    CLI::App app{"fedsim: deterministic federated-learning simulator with ECGR re-aggregation"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed_override;

    auto add_common = [&](CLI::App* sub, bool config_required) {
        sub->add_option("--config", config_path, "config file (flat key=value)")
            ->required(config_required);
        sub->add_option("--out", out_dir, "output directory (overrides config)");
        sub->add_option("--seed-override", seed_override, "run a single seed instead of the list");
    };

    CLI::App* run = app.add_subcommand("run", "train the configured experiment and export CSVs");
    add_common(run, true);

    CLI::App* stats = app.add_subcommand("partition-stats", "per-client label histograms/entropy");
    add_common(stats, true);

    CLI::App* select = app.add_subcommand("export-selection", "export ECGR selection masks");
    add_common(select, true);

    CLI::App* theory = app.add_subcommand("check-theory", "randomized theorem suites");
    int samples = 1000;
    int dim = 16;
    std::uint64_t theory_seed = 42;
    theory->add_option("--samples", samples, "cases per suite")->capture_default_str();
    theory->add_option("--dim", dim, "vector dimension")->capture_default_str();
    theory->add_option("--seed", theory_seed, "suite seed")->capture_default_str();
    theory->add_option("--out", out_dir, "output directory for theory_report.txt");

    CLI11_PARSE(app, argc, argv);

    try {
        if (theory->parsed()) {
            return fedsim::cmd_check_theory(samples, dim, theory_seed,
                                            out_dir.empty() ? "out" : out_dir);
        }

        fedsim::RunConfig cfg = fedsim::parse_config(config_path);
        if (!out_dir.empty()) cfg.out_dir = out_dir;

        if (run->parsed()) return fedsim::cmd_run(cfg, seed_override);
        if (stats->parsed()) return fedsim::cmd_partition_stats(cfg, seed_override);
        if (select->parsed()) return fedsim::cmd_export_selection(cfg, seed_override);
    } catch (const fedsim::FedError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
