#include "fedsim/model.hpp"

#include <algorithm>
#include <cmath>

#include "fedsim/errors.hpp"

namespace fedsim {

// Parameter layout:
//   logistic: [W (C x d) row-major][b (C)]
//   mlp:      [W1 (h x d)][b1 (h)][W2 (C x h)][b2 (C)]
std::size_t ModelSpec::param_count() const {
    const std::size_t d = static_cast<std::size_t>(input_dim);
    const std::size_t c = static_cast<std::size_t>(num_classes);
    const std::size_t h = static_cast<std::size_t>(hidden_dim);
    if (kind == ModelKind::logistic) return c * d + c;
    return h * d + h + c * h + c;
}

namespace {

void validate_spec(const ModelSpec& spec) {
    if (spec.input_dim <= 0 || spec.num_classes <= 0) {
        throw ConfigError("model spec: input_dim and num_classes must be positive");
    }
    if (spec.kind == ModelKind::mlp && spec.hidden_dim <= 0) {
        throw ConfigError("model spec: mlp requires hidden_dim > 0");
    }
    if (spec.kind == ModelKind::logistic && spec.hidden_dim != 0) {
        throw ConfigError("model spec: logistic requires hidden_dim == 0");
    }
}

double activate(Activation a, double x) {
    return a == Activation::tanh ? std::tanh(x) : (x > 0.0 ? x : 0.0);
}

double activate_deriv(Activation a, double pre, double post) {
    return a == Activation::tanh ? 1.0 - post * post : (pre > 0.0 ? 1.0 : 0.0);
}

// Softmax probabilities with max subtraction; returns the log-partition so
// the caller can form -log p_y without cancellation.
void softmax(std::vector<double>& logits, std::vector<double>& probs, double& log_z) {
    const double m = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    probs.resize(logits.size());
    for (std::size_t c = 0; c < logits.size(); ++c) {
        probs[c] = std::exp(logits[c] - m);
        sum += probs[c];
    }
    for (auto& p : probs) p /= sum;
    log_z = m + std::log(sum);
}

struct ForwardScratch {
    std::vector<double> logits;
    std::vector<double> probs;
    std::vector<double> hidden_pre;
    std::vector<double> hidden;
    std::vector<double> delta_out;
    std::vector<double> delta_hidden;
};

// Per-sample cross-entropy; fills scratch with the forward pass.
double forward(const ModelSpec& spec, const ParamVector& w, const ParamVector& x, int label,
               ForwardScratch& s) {
    const std::size_t d = static_cast<std::size_t>(spec.input_dim);
    const std::size_t c = static_cast<std::size_t>(spec.num_classes);
    s.logits.assign(c, 0.0);

    if (spec.kind == ModelKind::logistic) {
        for (std::size_t k = 0; k < c; ++k) {
            double z = w[c * d + k]; // bias
            const std::size_t row = k * d;
            for (std::size_t j = 0; j < d; ++j) z += w[row + j] * x[j];
            s.logits[k] = z;
        }
    } else {
        const std::size_t h = static_cast<std::size_t>(spec.hidden_dim);
        const std::size_t off_b1 = h * d;
        const std::size_t off_w2 = off_b1 + h;
        const std::size_t off_b2 = off_w2 + c * h;
        s.hidden_pre.assign(h, 0.0);
        s.hidden.assign(h, 0.0);
        for (std::size_t i = 0; i < h; ++i) {
            double z = w[off_b1 + i];
            const std::size_t row = i * d;
            for (std::size_t j = 0; j < d; ++j) z += w[row + j] * x[j];
            s.hidden_pre[i] = z;
            s.hidden[i] = activate(spec.activation, z);
        }
        for (std::size_t k = 0; k < c; ++k) {
            double z = w[off_b2 + k];
            const std::size_t row = off_w2 + k * h;
            for (std::size_t i = 0; i < h; ++i) z += w[row + i] * s.hidden[i];
            s.logits[k] = z;
        }
    }

    double log_z = 0.0;
    softmax(s.logits, s.probs, log_z);
    return log_z - s.logits[static_cast<std::size_t>(label)];
}

// Accumulates the per-sample gradient into g (unnormalized sum).
void backward(const ModelSpec& spec, const ParamVector& w, const ParamVector& x, int label,
              const ForwardScratch& s, ForwardScratch& bs, ParamVector& g) {
    const std::size_t d = static_cast<std::size_t>(spec.input_dim);
    const std::size_t c = static_cast<std::size_t>(spec.num_classes);

    bs.delta_out.assign(c, 0.0);
    for (std::size_t k = 0; k < c; ++k) {
        bs.delta_out[k] = s.probs[k] - (static_cast<int>(k) == label ? 1.0 : 0.0);
    }

    if (spec.kind == ModelKind::logistic) {
        for (std::size_t k = 0; k < c; ++k) {
            const double dk = bs.delta_out[k];
            const std::size_t row = k * d;
            for (std::size_t j = 0; j < d; ++j) g[row + j] += dk * x[j];
            g[c * d + k] += dk;
        }
        return;
    }

    const std::size_t h = static_cast<std::size_t>(spec.hidden_dim);
    const std::size_t off_b1 = h * d;
    const std::size_t off_w2 = off_b1 + h;
    const std::size_t off_b2 = off_w2 + c * h;

    bs.delta_hidden.assign(h, 0.0);
    for (std::size_t k = 0; k < c; ++k) {
        const double dk = bs.delta_out[k];
        const std::size_t row = off_w2 + k * h;
        for (std::size_t i = 0; i < h; ++i) {
            g[row + i] += dk * s.hidden[i];
            bs.delta_hidden[i] += dk * w[row + i];
        }
        g[off_b2 + k] += dk;
    }
    for (std::size_t i = 0; i < h; ++i) {
        const double di =
            bs.delta_hidden[i] * activate_deriv(spec.activation, s.hidden_pre[i], s.hidden[i]);
        const std::size_t row = i * d;
        for (std::size_t j = 0; j < d; ++j) g[row + j] += di * x[j];
        g[off_b1 + i] += di;
    }
}

} // namespace

ParamVector init_params(const ModelSpec& spec, RngStream& rng) {
    validate_spec(spec);
    const std::size_t d = static_cast<std::size_t>(spec.input_dim);
    const std::size_t c = static_cast<std::size_t>(spec.num_classes);
    ParamVector w(spec.param_count());

    auto uniform = [&rng](double bound) { return (rng.next_unit() * 2.0 - 1.0) * bound; };

    if (spec.kind == ModelKind::logistic) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(d));
        for (std::size_t i = 0; i < c * d; ++i) w[i] = uniform(bound);
        // biases stay zero
    } else {
        const std::size_t h = static_cast<std::size_t>(spec.hidden_dim);
        const double b1 = 1.0 / std::sqrt(static_cast<double>(d));
        const double b2 = 1.0 / std::sqrt(static_cast<double>(h));
        std::size_t pos = 0;
        for (std::size_t i = 0; i < h * d; ++i) w[pos++] = uniform(b1);
        pos += h; // b1 zero
        for (std::size_t i = 0; i < c * h; ++i) w[pos++] = uniform(b2);
        // b2 zero
    }
    return w;
}

LossGrad loss_and_grad(const ModelSpec& spec, const ParamVector& params, const Dataset& ds,
                       std::span<const std::size_t> batch) {
    validate_spec(spec);
    if (batch.empty()) throw ConfigError("loss_and_grad: empty batch");
    if (params.size() != spec.param_count()) {
        throw DimensionError("loss_and_grad: params length " + std::to_string(params.size()) +
                             " != spec " + std::to_string(spec.param_count()));
    }
    if (ds.dim() != spec.input_dim) {
        throw DimensionError("loss_and_grad: dataset dim != spec input_dim");
    }

    // Canonical ascending-index accumulation: exact permutation invariance.
    std::vector<std::size_t> order(batch.begin(), batch.end());
    std::sort(order.begin(), order.end());

    LossGrad out;
    out.grad = ParamVector(params.size());
    ForwardScratch s;
    double loss_sum = 0.0;
    for (const std::size_t i : order) {
        if (i >= ds.size()) throw DimensionError("loss_and_grad: sample index out of range");
        loss_sum += forward(spec, params, ds.features[i], ds.labels[i], s);
        backward(spec, params, ds.features[i], ds.labels[i], s, s, out.grad);
    }
    const double inv_n = 1.0 / static_cast<double>(order.size());
    out.loss = loss_sum * inv_n;
    scale_inplace(out.grad, inv_n);
    return out;
}

EvalResult evaluate(const ModelSpec& spec, const ParamVector& params, const Dataset& ds, Exec exec) {
    validate_spec(spec);
    if (ds.size() == 0) return {0.0, 0.0};
    if (params.size() != spec.param_count()) {
        throw DimensionError("evaluate: params length mismatch");
    }

    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(ds.size());
    std::vector<double> losses(ds.size(), 0.0);
    std::vector<unsigned char> correct(ds.size(), 0);

    // Per-sample results land in preallocated slots; the reduction below is
    // serial and ascending, so parallel and serial runs agree bit-for-bit.
#pragma omp parallel for schedule(static) if (exec == Exec::parallel)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        ForwardScratch s;
        const std::size_t u = static_cast<std::size_t>(i);
        losses[u] = forward(spec, params, ds.features[u], ds.labels[u], s);
        const std::size_t pred = static_cast<std::size_t>(
            std::max_element(s.logits.begin(), s.logits.end()) - s.logits.begin());
        correct[u] = (static_cast<int>(pred) == ds.labels[u]) ? 1 : 0;
    }

    double loss_sum = 0.0;
    std::size_t n_correct = 0;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        loss_sum += losses[i];
        n_correct += correct[i];
    }
    return {static_cast<double>(n_correct) / static_cast<double>(ds.size()),
            loss_sum / static_cast<double>(ds.size())};
}

} // namespace fedsim
