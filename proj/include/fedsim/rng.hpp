#pragma once

#include <cstdint>
#include <vector>

namespace fedsim {

// Stream purposes used to derive independent sub-streams from one run seed.
// The layout of stream ids is part of the exported-run replay contract:
//   id = (purpose << 56) | (a << 28) | b
// with a = client/class index and b = round index where applicable.
enum class StreamPurpose : std::uint64_t {
    param_init = 1,
    batch_shuffle = 2,
    synthetic = 3,
    dirichlet = 4,
    theory = 5,
    generic = 6,
};

constexpr std::uint64_t stream_id(StreamPurpose p, std::uint64_t a = 0, std::uint64_t b = 0) {
    return (static_cast<std::uint64_t>(p) << 56) | ((a & 0xFFFFFFFull) << 28) | (b & 0xFFFFFFFull);
}

/// Deterministic splittable PRNG based on SplitMix64.
///
/// State advances by the Weyl constant 0x9E3779B97F4A7C15 per draw and the
/// output is the standard SplitMix64 finalizer (constants 0xBF58476D1CE4E5B9
/// and 0x94D049BB133111EB). Streams are seeded as
///   state0 = mix(seed + GAMMA) ^ mix(stream_id + 2*GAMMA)
/// so equal (seed, stream_id) pairs replay bit-for-bit and distinct stream
/// ids give independent sequences for simulator purposes. Gaussians come
/// from Box-Muller, Gamma variates from the Marsaglia-Tsang method.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t id);

    std::uint64_t next_u64();

    /// Uniform in [0, 1), 53-bit resolution.
    double next_unit();

    /// Uniform in (0, 1].
    double next_unit_open();

    /// Standard normal.
    double next_gaussian();

    /// Gamma(shape, 1), shape > 0.
    double next_gamma(double shape);

    /// Uniform integer in [0, n), n >= 1. Rejection-sampled, unbiased.
    std::uint64_t next_below(std::uint64_t n);

    /// In-place Fisher-Yates shuffle.
    template <typename T>
    void shuffle(std::vector<T>& items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(next_below(i));
            std::swap(items[i - 1], items[j]);
        }
    }

private:
    std::uint64_t state_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

} // namespace fedsim
