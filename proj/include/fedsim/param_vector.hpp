#pragma once

#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "fedsim/errors.hpp"

namespace fedsim {

/// Flat vector of 64-bit floats holding model parameters and gradients.
/// Length is fixed at construction; all arithmetic preserves it.
class ParamVector {
public:
    ParamVector() = default;
    explicit ParamVector(std::size_t dim, double fill = 0.0) : v_(dim, fill) {}
    explicit ParamVector(std::vector<double> values) : v_(std::move(values)) {}
    ParamVector(std::initializer_list<double> values) : v_(values) {}

    std::size_t size() const { return v_.size(); }
    bool empty() const { return v_.empty(); }

    double operator[](std::size_t i) const { return v_[i]; }
    double& operator[](std::size_t i) { return v_[i]; }

    const double* data() const { return v_.data(); }
    double* data() { return v_.data(); }

    auto begin() const { return v_.begin(); }
    auto end() const { return v_.end(); }

    const std::vector<double>& values() const { return v_; }

    bool operator==(const ParamVector& o) const = default;

private:
    std::vector<double> v_;
};

inline void require_same_size(const ParamVector& x, const ParamVector& y, const char* op) {
    if (x.size() != y.size()) {
        throw DimensionError(std::string(op) + ": length mismatch (" +
                             std::to_string(x.size()) + " vs " + std::to_string(y.size()) + ")");
    }
}

/// Inner product, accumulated in ascending index order.
inline double dot(const ParamVector& x, const ParamVector& y) {
    require_same_size(x, y, "dot");
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
    return s;
}

inline double squared_norm(const ParamVector& x) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * x[i];
    return s;
}

/// Euclidean norm.
inline double norm(const ParamVector& x) { return std::sqrt(squared_norm(x)); }

/// alpha*x + y, elementwise.
inline ParamVector axpy(double alpha, const ParamVector& x, const ParamVector& y) {
    require_same_size(x, y, "axpy");
    ParamVector r(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) r[i] = alpha * x[i] + y[i];
    return r;
}

inline ParamVector scale(double k, const ParamVector& x) {
    ParamVector r(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) r[i] = k * x[i];
    return r;
}

inline ParamVector add(const ParamVector& x, const ParamVector& y) { return axpy(1.0, x, y); }

inline ParamVector sub(const ParamVector& x, const ParamVector& y) {
    require_same_size(x, y, "sub");
    ParamVector r(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) r[i] = x[i] - y[i];
    return r;
}

/// y += alpha*x
inline void add_scaled_inplace(ParamVector& y, double alpha, const ParamVector& x) {
    require_same_size(x, y, "add_scaled_inplace");
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

inline void scale_inplace(ParamVector& x, double k) {
    for (std::size_t i = 0; i < x.size(); ++i) x[i] *= k;
}

inline bool all_finite(const ParamVector& x) {
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!std::isfinite(x[i])) return false;
    }
    return true;
}

inline double squared_distance(const ParamVector& x, const ParamVector& y) {
    require_same_size(x, y, "squared_distance");
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - y[i];
        s += d * d;
    }
    return s;
}

} // namespace fedsim
