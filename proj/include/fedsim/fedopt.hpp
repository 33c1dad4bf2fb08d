#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fedsim/dataset.hpp"
#include "fedsim/ecgr.hpp"
#include "fedsim/model.hpp"
#include "fedsim/param_vector.hpp"
#include "fedsim/partition.hpp"

namespace fedsim {

enum class Algorithm { fedavg, fedprox, fednova, scaffold };

std::string algorithm_name(Algorithm a);
Algorithm algorithm_from_name(const std::string& name);

struct AlgoConfig {
    Algorithm algorithm = Algorithm::fedavg;
    bool ecgr_enabled = false;
    double beta = 0.2;      // damping on exploratory gradients
    double mu = 0.0;        // proximal coefficient, fedprox only
    double lr = 0.001;      // local learning rate eta_l
    int lr_decay_every = 10;
    double lr_decay_factor = 0.5;
    double momentum = 0.9;
    int batch_size = 128;
    int rounds = 100;
};

/// Local learning rate in effect at (zero-based) round t.
double lr_at_round(const AlgoConfig& cfg, int round);

struct ServerState {
    ParamVector w;
    int round = 0;
    ParamVector control; // scaffold global control variate, empty otherwise
};

struct LocalTrainResult {
    GradientSet steps;
    ParamVector final_params;
};

/// One client's local epoch: momentum SGD over the given batches starting
/// from w_start, with the per-algorithm raw direction
///   fedavg/fednova: grad F
///   fedprox:        grad F + mu (w - w_start)
///   scaffold:       grad F - c_i + c
/// Each applied displacement (lr * momentum buffer) is recorded as one step.
LocalTrainResult local_train(const ModelSpec& mspec, const Dataset& ds,
                             const std::vector<std::vector<std::size_t>>& batches,
                             const ParamVector& w_start, const AlgoConfig& cfg, double lr,
                             const ParamVector* client_control,
                             const ParamVector* server_control);

struct ClientUpload {
    ParamVector upload;                // gradient sent to the server
    int tau = 0;
    ParamVector new_control;           // scaffold c_i', empty otherwise
    std::optional<EcgrSplit> split;    // present when ECGR ran
    // Retained only when instrumentation asks for it:
    GradientSet steps;
    ParamVector raw_sum;               // sum of steps
    ParamVector reaggregated;          // ECGR output before FedNova normalization
    ParamVector final_params;          // w^tau
};

/// Full client round: shuffle batches, local_train, optional ECGR, FedNova
/// normalization, scaffold control update. `keep_steps` retains the raw
/// trajectory for observers.
ClientUpload client_round(const ModelSpec& mspec, const Dataset& ds, const ClientPartition& part,
                          int client, const ParamVector& w, const AlgoConfig& cfg, double lr,
                          int round, std::uint64_t seed, const ParamVector* client_control,
                          const ParamVector* server_control, bool keep_steps);

/// Weighted aggregation in ascending client order. FedNova rescales by
/// tau_eff = sum p_i tau_i (uploads are already divided by tau_i client-side).
ParamVector server_aggregate(const std::vector<ParamVector>& uploads,
                             const std::vector<double>& weights, const std::vector<int>& taus,
                             const AlgoConfig& cfg);

/// w <- w - G (global learning rate fixed at 1). For scaffold, pass the new
/// client controls so c <- sum p_i c_i'.
ServerState global_update(const ServerState& server, const ParamVector& g,
                          const std::vector<ParamVector>* new_controls = nullptr,
                          const std::vector<double>* weights = nullptr);

struct MetricRecord {
    int round = 0; // 1-based: state after this many rounds
    std::uint64_t seed = 0;
    Algorithm algorithm = Algorithm::fedavg;
    bool ecgr = false;
    double beta = 0.0;
    double test_accuracy = 0.0;
    double test_loss = 0.0;
};

struct SelectionMask {
    int round = 0; // 1-based
    int client = 0;
    int tau = 0;
    std::vector<int> selected; // convergent indices
    double beta = 0.0;
};

/// Snapshot handed to per-client observers, in ascending client order after
/// each round's parallel section.
struct RoundClientView {
    int round = 0; // 1-based
    int client = 0;
    double lr = 0.0;
    const ParamVector* round_start_params = nullptr;
    const ClientUpload* upload = nullptr;
};

struct TrainOptions {
    Exec exec = Exec::serial;
    bool capture_trajectory = false;
    bool collect_masks = true;
    std::function<void(const RoundClientView&)> on_client;
};

struct TrainResult {
    std::vector<MetricRecord> metrics;
    std::vector<SelectionMask> masks;
    std::vector<ParamVector> trajectory; // w after each round, when requested
    ParamVector final_params;
};

/// Runs T federated rounds. Deterministic in (datasets, partition, cfg,
/// mspec, seed): the parallel and serial paths give bit-identical results
/// because clients are independent and every reduction is order-fixed.
TrainResult run_training(const ModelSpec& mspec, const Dataset& train, const Dataset& test,
                         const ClientPartition& part, const AlgoConfig& cfg, std::uint64_t seed,
                         const TrainOptions& opts = {});

} // namespace fedsim
