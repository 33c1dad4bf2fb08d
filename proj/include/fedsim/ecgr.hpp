#pragma once

#include <vector>

#include "fedsim/param_vector.hpp"

namespace fedsim {

/// Ordered per-step parameter displacements recorded during one client's
/// local epoch. Each entry is the vector actually subtracted from the local
/// model at that step (learning rate and momentum included), so the entries
/// sum to the client's total local displacement.
struct GradientSet {
    std::vector<ParamVector> steps;

    int tau() const { return static_cast<int>(steps.size()); }

    /// Sum of all steps in ascending step order.
    ParamVector sum() const;
};

/// Partition of a GradientSet into convergent indices (size floor(tau/2))
/// and the exploratory complement, plus the damping factor applied to the
/// exploratory side.
struct EcgrSplit {
    std::vector<int> convergent;  // ascending
    std::vector<int> exploratory; // ascending
    double beta = 0.2;
};

struct ReaggregatedGradient {
    ParamVector combined;   // gamma * (g_pi + beta * g_pi')
    double gamma = 0.0;
    bool degenerate = false; // fell back to the raw sum because the combination vanished
};

/// Greedy herding selection: starting from S = 0, repeatedly pick the
/// remaining step minimizing ||S + step|| (ties to the lowest index) until
/// floor(tau/2) steps are chosen. Those indices form the convergent set.
EcgrSplit herding_select(const GradientSet& gs, double beta);

/// Re-aggregation: v = g_pi + beta * g_pi', scaled by gamma = ||sum|| / ||v||
/// so the result keeps the raw sum's norm. If v vanishes while the raw sum
/// does not, returns the raw sum with the degenerate flag set.
ReaggregatedGradient re_aggregate(const GradientSet& gs, const EcgrSplit& split);

} // namespace fedsim
