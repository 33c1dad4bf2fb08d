#include "fedsim/rng.hpp"

#include <cmath>

#include "fedsim/errors.hpp"

namespace fedsim {
namespace {

constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ull;

std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ull;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBull;
    z ^= z >> 31;
    return z;
}

} // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t id)
    : state_(mix64(seed + kGamma) ^ mix64(id + 2 * kGamma)) {}

std::uint64_t RngStream::next_u64() {
    state_ += kGamma;
    return mix64(state_);
}

double RngStream::next_unit() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::next_unit_open() {
    return 1.0 - next_unit();
}

double RngStream::next_gaussian() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    const double u1 = next_unit_open();
    const double u2 = next_unit();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * M_PI * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
}

double RngStream::next_gamma(double shape) {
    if (!(shape > 0.0)) throw ConfigError("next_gamma: shape must be > 0");
    if (shape < 1.0) {
        // Boost trick: Gamma(a) = Gamma(a+1) * U^(1/a). For very small a the
        // power underflows toward zero, which is the correct extreme-skew limit.
        const double g = next_gamma(shape + 1.0);
        const double u = next_unit_open();
        return g * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x;
        double v;
        do {
            x = next_gaussian();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = next_unit_open();
        if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
        if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
}

std::uint64_t RngStream::next_below(std::uint64_t n) {
    if (n == 0) throw ConfigError("next_below: n must be >= 1");
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
        const std::uint64_t r = next_u64();
        if (r >= threshold) return r % n;
    }
}

} // namespace fedsim
