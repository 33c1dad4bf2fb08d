#include "fedsim/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "fedsim/errors.hpp"

namespace fedsim {

double align(const ParamVector& x, const ParamVector& z) {
    const double nx = norm(x);
    const double nz = norm(z);
    if (nx == 0.0 || nz == 0.0) throw ZeroVectorError("align: zero vector");
    return dot(x, z) / (nx * nz);
}

std::vector<double> monotonicity_curve(const ParamVector& x, const ParamVector& y,
                                       const ParamVector& z, std::span<const double> betas) {
    require_same_size(x, y, "monotonicity_curve");
    require_same_size(x, z, "monotonicity_curve");
    std::vector<double> out;
    out.reserve(betas.size());
    for (const double beta : betas) {
        const ParamVector u = axpy(beta, y, x);
        const double nu = norm(u);
        if (nu == 0.0) {
            throw ZeroVectorError("monotonicity_curve: x + beta*y vanishes at beta = " +
                                  std::to_string(beta));
        }
        out.push_back(dot(u, z) / nu);
    }
    return out;
}

ErrorReductionResult check_error_reduction(const TheoryCase& tc) {
    require_same_size(tc.a, tc.b, "check_error_reduction");
    require_same_size(tc.a, tc.mu, "check_error_reduction");

    const ParamVector c = add(tc.a, tc.b);
    const ParamVector v = axpy(tc.beta, tc.b, tc.a);
    const double vn = norm(v);
    if (vn == 0.0) throw ZeroVectorError("check_error_reduction: a + beta*b vanishes");

    ErrorReductionResult r;
    r.gamma = norm(c) / vn;
    r.lhs = squared_distance(scale(r.gamma, v), tc.mu);
    r.rhs = squared_distance(c, tc.mu);
    r.holds = r.lhs < r.rhs;
    return r;
}

ParamVector true_gradient(const ModelSpec& spec, const ParamVector& params, const Dataset& ds) {
    if (ds.size() == 0) throw ConfigError("true_gradient: empty dataset");
    std::vector<std::size_t> all(ds.size());
    std::iota(all.begin(), all.end(), 0);
    return loss_and_grad(spec, params, ds, all).grad;
}

namespace {

ParamVector indexed_sum(const GradientSet& gs, const std::vector<int>& indices) {
    ParamVector s(gs.steps.empty() ? 0 : gs.steps[0].size());
    for (const int e : indices) add_scaled_inplace(s, 1.0, gs.steps[static_cast<std::size_t>(e)]);
    return s;
}

} // namespace

AuditedRun run_with_deviation_audit(const ModelSpec& mspec, const Dataset& train,
                                    const Dataset& test, const ClientPartition& part,
                                    const AlgoConfig& cfg, std::uint64_t seed,
                                    const TrainOptions& opts, const AuditOptions& audit) {
    if (!cfg.ecgr_enabled) {
        throw ConfigError("deviation audit requires ecgr to be enabled");
    }
    const int every = audit.every < 1 ? 1 : audit.every;

    AuditedRun out;
    int cached_round = -1;
    ParamVector cached_true_grad;

    TrainOptions hooked = opts;
    hooked.on_client = [&](const RoundClientView& view) {
        if (opts.on_client) opts.on_client(view);
        if ((view.round - 1) % every != 0) return;

        if (view.round != cached_round) {
            cached_true_grad = true_gradient(mspec, *view.round_start_params, train);
            cached_round = view.round;
        }

        const ClientUpload& up = *view.upload;
        const double scale_mu = static_cast<double>(up.tau) * view.lr;
        const ParamVector mu_step = scale(scale_mu, cached_true_grad);

        DeviationRecord rec;
        rec.round = view.round;
        rec.client = view.client;
        rec.dev_raw = squared_distance(up.raw_sum, mu_step);
        rec.dev_ecgr = squared_distance(up.reaggregated, mu_step);

        const ParamVector a = indexed_sum(up.steps, up.split->convergent);
        const ParamVector b = indexed_sum(up.steps, up.split->exploratory);
        if (norm(a) > 0.0 && norm(b) > 0.0 && norm(mu_step) > 0.0) {
            rec.assumption_held = align(a, mu_step) > align(b, mu_step);
        }
        out.deviations.push_back(rec);
    };

    out.train = run_training(mspec, train, test, part, cfg, seed, hooked);
    return out;
}

SelectionStats selection_stats(std::span<const SelectionMask> masks) {
    if (masks.empty()) throw ConfigError("selection_stats: no masks");

    SelectionStats stats;
    stats.per_mask.reserve(masks.size());

    int max_client = 0;
    for (const auto& m : masks) max_client = std::max(max_client, m.client);
    std::vector<double> client_sum(static_cast<std::size_t>(max_client) + 1, 0.0);
    std::vector<int> client_count(static_cast<std::size_t>(max_client) + 1, 0);

    double total = 0.0;
    for (const auto& m : masks) {
        int late = 0;
        for (const int e : m.selected) {
            if (2 * e >= m.tau) ++late;
        }
        const double frac =
            m.selected.empty() ? 0.0 : static_cast<double>(late) / static_cast<double>(m.selected.size());
        stats.per_mask.push_back(frac);
        total += frac;
        client_sum[static_cast<std::size_t>(m.client)] += frac;
        client_count[static_cast<std::size_t>(m.client)] += 1;
    }
    stats.mean_late_fraction = total / static_cast<double>(masks.size());
    stats.per_client_mean.resize(client_sum.size(), 0.0);
    for (std::size_t i = 0; i < client_sum.size(); ++i) {
        if (client_count[i] > 0) stats.per_client_mean[i] = client_sum[i] / client_count[i];
    }
    return stats;
}

// ---------------------------------------------------------------------------
// Randomized suites
// ---------------------------------------------------------------------------

namespace {

ParamVector gaussian_vector(RngStream& rng, int dim) {
    ParamVector v(static_cast<std::size_t>(dim));
    for (int j = 0; j < dim; ++j) v[static_cast<std::size_t>(j)] = rng.next_gaussian();
    return v;
}

std::string dump_vector(const char* name, const ParamVector& v) {
    std::ostringstream os;
    os << name << " = [";
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) os << ", ";
        os << v[i];
    }
    os << "]";
    return os.str();
}

} // namespace

SuiteReport magnitude_preservation_suite(int samples, int dim, std::uint64_t seed) {
    if (samples < 1) throw ConfigError("magnitude suite: samples must be >= 1");
    if (dim < 1) throw ConfigError("magnitude suite: dim must be >= 1");

    constexpr double kBetas[] = {0.0, 0.2, 0.5, 1.0};
    RngStream rng(seed, stream_id(StreamPurpose::theory, 1));

    SuiteReport rep;
    rep.total = samples;
    rep.worst_margin = 0.0; // largest relative norm deviation seen
    for (int s = 0; s < samples; ++s) {
        const int tau = 2 + static_cast<int>(rng.next_below(9)); // 2..10
        const double beta = kBetas[static_cast<std::size_t>(s) % 4];
        GradientSet gs;
        gs.steps.reserve(static_cast<std::size_t>(tau));
        for (int i = 0; i < tau; ++i) gs.steps.push_back(gaussian_vector(rng, dim));

        const EcgrSplit split = herding_select(gs, beta);
        const ReaggregatedGradient re = re_aggregate(gs, split);
        const double raw_norm = norm(gs.sum());
        const double rel = std::abs(norm(re.combined) - raw_norm) / raw_norm;
        rep.worst_margin = std::max(rep.worst_margin, rel);
        if (re.degenerate || rel > 1e-9) {
            if (rep.counterexample.empty()) {
                std::ostringstream os;
                os << "sample " << s << " tau=" << tau << " beta=" << beta << " rel_error=" << rel;
                for (int i = 0; i < tau; ++i) {
                    os << "\n  " << dump_vector("step", gs.steps[static_cast<std::size_t>(i)]);
                }
                rep.counterexample = os.str();
            }
            continue;
        }
        ++rep.passed;
    }
    return rep;
}

SuiteReport monotonicity_suite(int samples, int dim, std::uint64_t seed) {
    if (samples < 1) throw ConfigError("monotonicity suite: samples must be >= 1");
    if (dim < 1) throw ConfigError("monotonicity suite: dim must be >= 1");

    RngStream rng(seed, stream_id(StreamPurpose::theory, 2));
    std::vector<double> grid(11);
    for (int i = 0; i <= 10; ++i) grid[static_cast<std::size_t>(i)] = 0.1 * i;

    SuiteReport rep;
    rep.total = samples;
    rep.worst_margin = std::numeric_limits<double>::infinity(); // min decrease per grid step
    for (int s = 0; s < samples; ++s) {
        ParamVector x, y, z;
        // Rejection-sample the monotonicity condition <x,z>/||x|| > <y,z>/||y||.
        for (;;) {
            x = gaussian_vector(rng, dim);
            y = gaussian_vector(rng, dim);
            z = gaussian_vector(rng, dim);
            const double nx = norm(x);
            const double ny = norm(y);
            if (nx == 0.0 || ny == 0.0 || norm(z) == 0.0) continue;
            if (dot(x, z) / nx > dot(y, z) / ny) break;
        }

        const auto f = monotonicity_curve(x, y, z, grid);
        bool ok = true;
        for (std::size_t j = 0; j + 1 < f.size(); ++j) {
            const double drop = f[j] - f[j + 1];
            rep.worst_margin = std::min(rep.worst_margin, drop);
            if (!(f[j + 1] < f[j] + 1e-12)) ok = false;
        }
        if (ok) {
            ++rep.passed;
        } else if (rep.counterexample.empty()) {
            std::ostringstream os;
            os << "sample " << s << ": curve not decreasing\n  " << dump_vector("x", x) << "\n  "
               << dump_vector("y", y) << "\n  " << dump_vector("z", z);
            rep.counterexample = os.str();
        }
    }
    return rep;
}

SuiteReport error_reduction_suite(int samples, int dim, std::uint64_t seed) {
    if (samples < 1) throw ConfigError("error reduction suite: samples must be >= 1");
    if (dim < 1) throw ConfigError("error reduction suite: dim must be >= 1");

    constexpr double kBetas[] = {0.0, 0.2, 0.5, 0.9};
    RngStream rng(seed, stream_id(StreamPurpose::theory, 3));

    SuiteReport rep;
    rep.total = samples;
    rep.worst_margin = std::numeric_limits<double>::infinity(); // min relative gap (rhs-lhs)/rhs
    for (int s = 0; s < samples; ++s) {
        TheoryCase tc;
        // Rejection-sample the convergent-superiority assumption.
        for (;;) {
            tc.a = gaussian_vector(rng, dim);
            tc.b = gaussian_vector(rng, dim);
            tc.mu = gaussian_vector(rng, dim);
            const double na = norm(tc.a);
            const double nb = norm(tc.b);
            const double nmu = norm(tc.mu);
            if (na == 0.0 || nb == 0.0 || nmu == 0.0) continue;
            if (align(tc.a, tc.mu) > align(tc.b, tc.mu)) break;
        }

        bool ok = true;
        std::string reason;
        for (const double beta : kBetas) {
            tc.beta = beta;
            const auto r = check_error_reduction(tc);
            const double gap = (r.rhs - r.lhs) / r.rhs;
            rep.worst_margin = std::min(rep.worst_margin, gap);
            if (!(r.lhs < r.rhs + 1e-12 * r.rhs)) {
                ok = false;
                reason = "beta=" + std::to_string(beta) + " lhs=" + std::to_string(r.lhs) +
                         " rhs=" + std::to_string(r.rhs);
                break;
            }
        }
        if (ok) {
            // Boundary: beta = 1 must close the gap.
            tc.beta = 1.0;
            const auto r = check_error_reduction(tc);
            if (!(std::abs(r.lhs - r.rhs) <= 1e-12 * r.rhs)) {
                ok = false;
                reason = "beta=1 boundary: lhs=" + std::to_string(r.lhs) +
                         " rhs=" + std::to_string(r.rhs);
            }
        }

        if (ok) {
            ++rep.passed;
        } else if (rep.counterexample.empty()) {
            std::ostringstream os;
            os << "sample " << s << ": " << reason << "\n  " << dump_vector("a", tc.a) << "\n  "
               << dump_vector("b", tc.b) << "\n  " << dump_vector("mu", tc.mu);
            rep.counterexample = os.str();
        }
    }
    return rep;
}

} // namespace fedsim
