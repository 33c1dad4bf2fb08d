#pragma once

#include <span>
#include <vector>

#include "fedsim/dataset.hpp"
#include "fedsim/param_vector.hpp"
#include "fedsim/rng.hpp"

namespace fedsim {

enum class ModelKind { logistic, mlp };
enum class Activation { relu, tanh };

/// Where work may run. Both paths are bit-identical; `parallel` uses OpenMP
/// with order-fixed reductions, `serial` is the reference implementation.
enum class Exec { serial, parallel };

struct ModelSpec {
    ModelKind kind = ModelKind::logistic;
    int input_dim = 0;
    int hidden_dim = 0; // 0 for logistic
    int num_classes = 0;
    Activation activation = Activation::tanh;

    std::size_t param_count() const;
};

struct LossGrad {
    double loss = 0.0;
    ParamVector grad;
};

struct EvalResult {
    double accuracy = 0.0;
    double loss = 0.0;
};

/// Weights from a fan-in-scaled uniform, biases zero. Deterministic given rng.
ParamVector init_params(const ModelSpec& spec, RngStream& rng);

/// Mean cross-entropy over the batch and its exact gradient. Samples are
/// accumulated in ascending index order regardless of the batch's order, so
/// the result is exactly invariant to batch permutation.
LossGrad loss_and_grad(const ModelSpec& spec, const ParamVector& params, const Dataset& ds,
                       std::span<const std::size_t> batch);

/// Argmax accuracy (ties to the lowest class index) and mean cross-entropy
/// over the whole dataset.
EvalResult evaluate(const ModelSpec& spec, const ParamVector& params, const Dataset& ds,
                    Exec exec = Exec::serial);

} // namespace fedsim
