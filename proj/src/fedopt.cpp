#include "fedsim/fedopt.hpp"

#include <cmath>

#include "fedsim/errors.hpp"

namespace fedsim {

std::string algorithm_name(Algorithm a) {
    switch (a) {
    case Algorithm::fedavg: return "fedavg";
    case Algorithm::fedprox: return "fedprox";
    case Algorithm::fednova: return "fednova";
    case Algorithm::scaffold: return "scaffold";
    }
    return "unknown";
}

Algorithm algorithm_from_name(const std::string& name) {
    if (name == "fedavg") return Algorithm::fedavg;
    if (name == "fedprox") return Algorithm::fedprox;
    if (name == "fednova") return Algorithm::fednova;
    if (name == "scaffold") return Algorithm::scaffold;
    throw ConfigError("unknown algorithm: " + name);
}

double lr_at_round(const AlgoConfig& cfg, int round) {
    if (cfg.lr_decay_every <= 0) return cfg.lr;
    return cfg.lr * std::pow(cfg.lr_decay_factor, round / cfg.lr_decay_every);
}

LocalTrainResult local_train(const ModelSpec& mspec, const Dataset& ds,
                             const std::vector<std::vector<std::size_t>>& batches,
                             const ParamVector& w_start, const AlgoConfig& cfg, double lr,
                             const ParamVector* client_control,
                             const ParamVector* server_control) {
    if (batches.size() < 2) {
        throw GradientSetTooSmall("local_train: need at least 2 batches, have " +
                                  std::to_string(batches.size()));
    }
    const bool scaffold = cfg.algorithm == Algorithm::scaffold;
    if (scaffold && (client_control == nullptr || server_control == nullptr)) {
        throw ConfigError("local_train: scaffold requires control variates");
    }

    LocalTrainResult out;
    out.final_params = w_start;
    out.steps.steps.reserve(batches.size());

    ParamVector momentum_buf(w_start.size());
    for (const auto& batch : batches) {
        LossGrad lg = loss_and_grad(mspec, out.final_params, ds, batch);

        ParamVector direction = std::move(lg.grad);
        if (cfg.algorithm == Algorithm::fedprox && cfg.mu != 0.0) {
            for (std::size_t j = 0; j < direction.size(); ++j) {
                direction[j] += cfg.mu * (out.final_params[j] - w_start[j]);
            }
        } else if (scaffold) {
            for (std::size_t j = 0; j < direction.size(); ++j) {
                direction[j] += (*server_control)[j] - (*client_control)[j];
            }
        }

        if (cfg.momentum != 0.0) {
            for (std::size_t j = 0; j < momentum_buf.size(); ++j) {
                momentum_buf[j] = cfg.momentum * momentum_buf[j] + direction[j];
            }
        } else {
            momentum_buf = std::move(direction);
        }

        ParamVector displacement = scale(lr, momentum_buf);
        for (std::size_t j = 0; j < displacement.size(); ++j) {
            out.final_params[j] -= displacement[j];
        }
        out.steps.steps.push_back(std::move(displacement));
    }

    if (!all_finite(out.final_params)) {
        throw FedError("local_train: non-finite parameters (diverged?)");
    }
    return out;
}

ClientUpload client_round(const ModelSpec& mspec, const Dataset& ds, const ClientPartition& part,
                          int client, const ParamVector& w, const AlgoConfig& cfg, double lr,
                          int round, std::uint64_t seed, const ParamVector* client_control,
                          const ParamVector* server_control, bool keep_steps) {
    RngStream shuffle_rng(seed, stream_id(StreamPurpose::batch_shuffle,
                                          static_cast<std::uint64_t>(client),
                                          static_cast<std::uint64_t>(round)));
    const auto batches = epoch_batches(part, client, cfg.batch_size, shuffle_rng);

    LocalTrainResult local = local_train(mspec, ds, batches, w, cfg, lr, client_control,
                                         server_control);
    const int tau = local.steps.tau();

    ClientUpload up;
    up.tau = tau;
    up.raw_sum = local.steps.sum();

    if (cfg.ecgr_enabled) {
        up.split = herding_select(local.steps, cfg.beta);
        ReaggregatedGradient re = re_aggregate(local.steps, *up.split);
        up.reaggregated = std::move(re.combined);
        up.upload = up.reaggregated;
    } else {
        up.upload = up.raw_sum;
    }

    // FedNova: normalize after re-aggregation, per the extended algorithm.
    if (cfg.algorithm == Algorithm::fednova) {
        for (std::size_t j = 0; j < up.upload.size(); ++j) {
            up.upload[j] /= static_cast<double>(tau);
        }
    }

    // Scaffold control update from the raw trajectory endpoint; ECGR only
    // changes the upload, never the local model used here.
    if (cfg.algorithm == Algorithm::scaffold) {
        up.new_control = ParamVector(w.size());
        const double inv = 1.0 / (static_cast<double>(tau) * lr);
        for (std::size_t j = 0; j < w.size(); ++j) {
            up.new_control[j] = (*client_control)[j] - (*server_control)[j] +
                                inv * (w[j] - local.final_params[j]);
        }
    }

    if (keep_steps) {
        up.steps = std::move(local.steps);
        up.final_params = std::move(local.final_params);
    }
    return up;
}

ParamVector server_aggregate(const std::vector<ParamVector>& uploads,
                             const std::vector<double>& weights, const std::vector<int>& taus,
                             const AlgoConfig& cfg) {
    if (uploads.empty() || uploads.size() != weights.size()) {
        throw AggregationError("server_aggregate: uploads/weights size mismatch");
    }
    double wsum = 0.0;
    for (const double p : weights) wsum += p;
    if (std::abs(wsum - 1.0) > 1e-9) {
        throw AggregationError("server_aggregate: weights sum to " + std::to_string(wsum));
    }

    ParamVector g(uploads[0].size());
    for (std::size_t i = 0; i < uploads.size(); ++i) {
        require_same_size(uploads[i], g, "server_aggregate");
        add_scaled_inplace(g, weights[i], uploads[i]);
    }

    if (cfg.algorithm == Algorithm::fednova) {
        if (taus.size() != uploads.size()) {
            throw AggregationError("server_aggregate: fednova needs one tau per upload");
        }
        double tau_eff = 0.0;
        for (std::size_t i = 0; i < taus.size(); ++i) {
            tau_eff += weights[i] * static_cast<double>(taus[i]);
        }
        scale_inplace(g, tau_eff);
    }
    return g;
}

ServerState global_update(const ServerState& server, const ParamVector& g,
                          const std::vector<ParamVector>* new_controls,
                          const std::vector<double>* weights) {
    require_same_size(server.w, g, "global_update");
    ServerState next;
    next.w = sub(server.w, g);
    next.round = server.round + 1;
    if (new_controls != nullptr) {
        if (weights == nullptr || new_controls->size() != weights->size()) {
            throw AggregationError("global_update: controls/weights size mismatch");
        }
        ParamVector c(server.w.size());
        for (std::size_t i = 0; i < new_controls->size(); ++i) {
            add_scaled_inplace(c, (*weights)[i], (*new_controls)[i]);
        }
        next.control = std::move(c);
    }
    return next;
}

TrainResult run_training(const ModelSpec& mspec, const Dataset& train, const Dataset& test,
                         const ClientPartition& part, const AlgoConfig& cfg, std::uint64_t seed,
                         const TrainOptions& opts) {
    const int n_clients = part.num_clients();
    if (n_clients == 0) throw PartitionError("run_training: empty partition");
    if (cfg.beta < 0.0 || cfg.beta > 1.0) throw ConfigError("run_training: beta must be in [0,1]");

    const bool scaffold = cfg.algorithm == Algorithm::scaffold;
    const bool keep_steps = static_cast<bool>(opts.on_client);

    RngStream init_rng(seed, stream_id(StreamPurpose::param_init));
    ServerState server;
    server.w = init_params(mspec, init_rng);
    if (scaffold) server.control = ParamVector(server.w.size());

    std::vector<ParamVector> client_controls;
    if (scaffold) client_controls.assign(static_cast<std::size_t>(n_clients),
                                         ParamVector(server.w.size()));

    TrainResult result;
    result.metrics.reserve(static_cast<std::size_t>(cfg.rounds));

    std::vector<ClientUpload> uploads(static_cast<std::size_t>(n_clients));

    for (int t = 0; t < cfg.rounds; ++t) {
        const double lr = lr_at_round(cfg, t);
        const ParamVector w_round = server.w;

        // Clients are independent within a round: each one owns its RNG
        // stream and writes only its own slot.
#pragma omp parallel for schedule(dynamic) if (opts.exec == Exec::parallel)
        for (int i = 0; i < n_clients; ++i) {
            const ParamVector* ci = scaffold ? &client_controls[static_cast<std::size_t>(i)] : nullptr;
            const ParamVector* c = scaffold ? &server.control : nullptr;
            uploads[static_cast<std::size_t>(i)] = client_round(
                mspec, train, part, i, w_round, cfg, lr, t, seed, ci, c, keep_steps);
        }

        // Everything below is serial and in ascending client order.
        for (int i = 0; i < n_clients; ++i) {
            const auto& up = uploads[static_cast<std::size_t>(i)];
            if (opts.collect_masks && up.split.has_value()) {
                result.masks.push_back(
                    {t + 1, i, up.tau, up.split->convergent, up.split->beta});
            }
            if (opts.on_client) {
                RoundClientView view{t + 1, i, lr, &w_round, &up};
                opts.on_client(view);
            }
        }

        std::vector<ParamVector> gradient_uploads;
        std::vector<int> taus;
        gradient_uploads.reserve(static_cast<std::size_t>(n_clients));
        taus.reserve(static_cast<std::size_t>(n_clients));
        for (int i = 0; i < n_clients; ++i) {
            gradient_uploads.push_back(uploads[static_cast<std::size_t>(i)].upload);
            taus.push_back(uploads[static_cast<std::size_t>(i)].tau);
        }

        const ParamVector g = server_aggregate(gradient_uploads, part.weights, taus, cfg);

        if (scaffold) {
            std::vector<ParamVector> new_controls;
            new_controls.reserve(static_cast<std::size_t>(n_clients));
            for (int i = 0; i < n_clients; ++i) {
                new_controls.push_back(uploads[static_cast<std::size_t>(i)].new_control);
            }
            server = global_update(server, g, &new_controls, &part.weights);
            client_controls = std::move(new_controls);
        } else {
            server = global_update(server, g);
        }

        if (!all_finite(server.w)) {
            throw FedError("run_training: non-finite global parameters after round " +
                           std::to_string(t + 1));
        }

        const EvalResult ev = evaluate(mspec, server.w, test, opts.exec);
        result.metrics.push_back({t + 1, seed, cfg.algorithm, cfg.ecgr_enabled, cfg.beta,
                                  ev.accuracy, ev.loss});
        if (opts.capture_trajectory) result.trajectory.push_back(server.w);
    }

    result.final_params = std::move(server.w);
    return result;
}

} // namespace fedsim
