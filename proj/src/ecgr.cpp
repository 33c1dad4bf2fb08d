#include "fedsim/ecgr.hpp"

#include <algorithm>

#include "fedsim/errors.hpp"

namespace fedsim {

ParamVector GradientSet::sum() const {
    if (steps.empty()) return {};
    ParamVector s(steps[0].size());
    for (const auto& g : steps) add_scaled_inplace(s, 1.0, g);
    return s;
}

EcgrSplit herding_select(const GradientSet& gs, double beta) {
    const int tau = gs.tau();
    if (tau < 2) {
        throw GradientSetTooSmall("herding_select: need at least 2 steps, have " +
                                  std::to_string(tau));
    }
    for (const auto& g : gs.steps) require_same_size(g, gs.steps[0], "herding_select");

    const int k = tau / 2;
    const std::size_t dim = gs.steps[0].size();

    ParamVector running(dim);
    std::vector<bool> taken(static_cast<std::size_t>(tau), false);
    std::vector<int> picked;
    picked.reserve(static_cast<std::size_t>(k));

    for (int step = 0; step < k; ++step) {
        int best = -1;
        double best_sq = 0.0;
        for (int e = 0; e < tau; ++e) {
            if (taken[static_cast<std::size_t>(e)]) continue;
            const auto& g = gs.steps[static_cast<std::size_t>(e)];
            double sq = 0.0;
            for (std::size_t j = 0; j < dim; ++j) {
                const double c = running[j] + g[j];
                sq += c * c;
            }
            // Strict < keeps the lowest index on ties.
            if (best < 0 || sq < best_sq) {
                best = e;
                best_sq = sq;
            }
        }
        taken[static_cast<std::size_t>(best)] = true;
        picked.push_back(best);
        add_scaled_inplace(running, 1.0, gs.steps[static_cast<std::size_t>(best)]);
    }

    EcgrSplit split;
    split.beta = beta;
    split.convergent = picked;
    std::sort(split.convergent.begin(), split.convergent.end());
    for (int e = 0; e < tau; ++e) {
        if (!taken[static_cast<std::size_t>(e)]) split.exploratory.push_back(e);
    }
    return split;
}

namespace {

ParamVector subset_sum(const GradientSet& gs, const std::vector<int>& indices, std::size_t dim) {
    ParamVector s(dim);
    for (const int e : indices) add_scaled_inplace(s, 1.0, gs.steps[static_cast<std::size_t>(e)]);
    return s;
}

void validate_split(const GradientSet& gs, const EcgrSplit& split) {
    const int tau = gs.tau();
    if (split.beta < 0.0 || split.beta > 1.0) {
        throw SplitError("re_aggregate: beta must be in [0,1]");
    }
    if (static_cast<int>(split.convergent.size()) != tau / 2) {
        throw SplitError("re_aggregate: convergent set must have floor(tau/2) elements");
    }
    std::vector<bool> seen(static_cast<std::size_t>(tau), false);
    auto mark = [&](const std::vector<int>& v) {
        for (const int e : v) {
            if (e < 0 || e >= tau || seen[static_cast<std::size_t>(e)]) {
                throw SplitError("re_aggregate: split is not a partition of the step indices");
            }
            seen[static_cast<std::size_t>(e)] = true;
        }
    };
    mark(split.convergent);
    mark(split.exploratory);
    for (int e = 0; e < tau; ++e) {
        if (!seen[static_cast<std::size_t>(e)]) {
            throw SplitError("re_aggregate: split misses step index " + std::to_string(e));
        }
    }
}

} // namespace

ReaggregatedGradient re_aggregate(const GradientSet& gs, const EcgrSplit& split) {
    if (gs.tau() < 2) {
        throw GradientSetTooSmall("re_aggregate: need at least 2 steps");
    }
    validate_split(gs, split);

    const std::size_t dim = gs.steps[0].size();
    const ParamVector raw = gs.sum();
    const double raw_norm = norm(raw);

    ParamVector v = subset_sum(gs, split.convergent, dim);
    add_scaled_inplace(v, split.beta, subset_sum(gs, split.exploratory, dim));
    const double v_norm = norm(v);

    ReaggregatedGradient out;
    if (raw_norm == 0.0) {
        out.combined = ParamVector(dim);
        out.gamma = 0.0;
        return out;
    }
    if (v_norm == 0.0) {
        out.combined = raw;
        out.gamma = 1.0;
        out.degenerate = true;
        return out;
    }
    out.gamma = raw_norm / v_norm;
    scale_inplace(v, out.gamma);
    out.combined = std::move(v);
    return out;
}

} // namespace fedsim
