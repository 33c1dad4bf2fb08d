#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fedsim/fedopt.hpp"

namespace fedsim {

/// Directional consistency: <x,z> / (||x|| ||z||). Throws ZeroVectorError on
/// a zero input.
double align(const ParamVector& x, const ParamVector& z);

/// f(beta) = <x + beta*y, z> / ||x + beta*y|| evaluated on the grid, in order.
std::vector<double> monotonicity_curve(const ParamVector& x, const ParamVector& y,
                                       const ParamVector& z, std::span<const double> betas);

/// Inputs of the error-reduction check: convergent sum a, exploratory sum b,
/// true gradient mu, damping beta.
struct TheoryCase {
    ParamVector a;
    ParamVector b;
    ParamVector mu;
    double beta = 0.0;
};

struct ErrorReductionResult {
    bool holds = false;
    double lhs = 0.0; // ||gamma*v - mu||^2
    double rhs = 0.0; // ||c - mu||^2
    double gamma = 0.0;
};

/// With c = a + b, v = a + beta*b, gamma = ||c||/||v||: compares
/// ||gamma*v - mu||^2 against ||c - mu||^2.
ErrorReductionResult check_error_reduction(const TheoryCase& tc);

/// Exact full-dataset mean cross-entropy gradient (the oracle for the true
/// gradient at the given parameters).
ParamVector true_gradient(const ModelSpec& spec, const ParamVector& params, const Dataset& ds);

struct DeviationRecord {
    int round = 0; // 1-based
    int client = 0;
    double dev_raw = 0.0;  // ||g - mu_step||^2
    double dev_ecgr = 0.0; // ||g' - mu_step||^2
    bool assumption_held = false;
};

struct AuditOptions {
    int every = 1; // audit rounds where (round-1) % every == 0
};

struct AuditedRun {
    TrainResult train;
    std::vector<DeviationRecord> deviations;
};

/// run_training with a read-only observer that compares each client's summed
/// displacement (and its ECGR refinement) against the displacement an exact
/// full-gradient client would produce: mu_step = tau * lr * gradF(w_t).
/// Requires ECGR enabled; intended for momentum-free configs so the units of
/// the comparison match.
AuditedRun run_with_deviation_audit(const ModelSpec& mspec, const Dataset& train,
                                    const Dataset& test, const ClientPartition& part,
                                    const AlgoConfig& cfg, std::uint64_t seed,
                                    const TrainOptions& opts = {}, const AuditOptions& audit = {});

struct SelectionStats {
    double mean_late_fraction = 0.0;         // over all masks
    std::vector<double> per_client_mean;     // indexed by client
    std::vector<double> per_mask;            // one entry per input mask
};

/// Fraction of convergent indices falling in the late half (index >= tau/2)
/// of the local epoch, per mask, per client, and overall.
SelectionStats selection_stats(std::span<const SelectionMask> masks);

// --- Randomized property suites (shared by the CLI and the acceptance tests) ---

struct SuiteReport {
    int total = 0;
    int passed = 0;
    double worst_margin = 0.0;  // most adverse slack observed (suite-specific)
    std::string counterexample; // human-readable dump of the first failure

    bool all_passed() const { return passed == total; }
};

/// Random GradientSets (tau in {2..10}, beta cycling {0, 0.2, 0.5, 1}):
/// herding + re-aggregation must preserve the raw sum's norm to 1e-9 rel.
SuiteReport magnitude_preservation_suite(int samples, int dim, std::uint64_t seed);

/// Condition-satisfying random triples: f(beta) strictly decreasing on an
/// 11-point grid with 1e-12 slack.
SuiteReport monotonicity_suite(int samples, int dim, std::uint64_t seed);

/// Assumption-satisfying random cases: error strictly reduced for
/// beta in {0, 0.2, 0.5, 0.9} (1e-12 rel slack) and lhs == rhs at beta = 1.
SuiteReport error_reduction_suite(int samples, int dim, std::uint64_t seed);

} // namespace fedsim
