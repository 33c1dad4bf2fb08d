#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "fedsim/analysis.hpp"
#include "fedsim/config.hpp"

namespace fedsim {

/// Shortest decimal string that parses back to exactly the same double.
std::string format_double(double x);

/// Builds the configured dataset pair (train, test). Synthetic data is drawn
/// once per class from shared centers and split class-by-class so train and
/// test come from the same distribution.
std::pair<Dataset, Dataset> build_datasets(const RunConfig& cfg);

/// Runs every configured seed (both arms when paired) and writes
/// metrics.csv, summary.csv and, for ECGR runs, masks.jsonl (plus
/// deviations.csv when auditing). Returns the process exit code.
int cmd_run(const RunConfig& cfg, std::optional<std::uint64_t> seed_override = {});

/// Runs the three randomized property suites, prints per-suite pass counts,
/// writes theory_report.txt under out_dir. Exit 0 iff every case passed.
int cmd_check_theory(int samples, int dim, std::uint64_t seed, const std::string& out_dir);

/// Writes per-client label histograms, sizes, weights and entropies for the
/// first (or overridden) seed's partition.
int cmd_partition_stats(const RunConfig& cfg, std::optional<std::uint64_t> seed_override = {});

/// Runs one ECGR training run and exports masks.jsonl plus per-client
/// late-half selection statistics.
int cmd_export_selection(const RunConfig& cfg, std::optional<std::uint64_t> seed_override = {});

} // namespace fedsim
