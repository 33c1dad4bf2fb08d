#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fedsim/fedopt.hpp"

namespace fedsim {

struct SyntheticSpec {
    int classes = 10;
    int dim = 32;
    int per_class = 2000;
    int test_per_class = 200;
    double separation = 3.0;
    std::uint64_t seed = 12345; // fixed dataset seed, independent of run seeds
};

struct MnistSpec {
    std::string train_images;
    std::string train_labels;
    std::string test_images;
    std::string test_labels;
};

enum class DataKind { synthetic, mnist };

/// One experiment: dataset, model, partition, optimizer, outputs.
/// Defaults follow the reference benchmark settings (10 clients,
/// alpha = 0.01, T = 100, lr 0.001 halving every 10 rounds, batch 128,
/// momentum 0.9, beta = 0.2, seeds 0/1/42/999/2025).
struct RunConfig {
    DataKind dataset = DataKind::synthetic;
    SyntheticSpec synthetic;
    MnistSpec mnist;

    ModelKind model_kind = ModelKind::logistic;
    int hidden_dim = 0;
    Activation activation = Activation::tanh;

    int clients = 10;
    double alpha = 0.01;
    int min_batches = 2;
    std::vector<std::uint64_t> seeds = {0, 1, 42, 999, 2025};

    AlgoConfig algo = {Algorithm::fedavg, true, 0.2, 0.0, 0.001, 10, 0.5, 0.9, 128, 100};

    bool paired = false;     // run baseline and ECGR arms with shared streams
    bool audit = false;      // emit deviation records (ECGR arm, momentum-free runs)
    int audit_every = 1;
    bool parallel = true;    // OpenMP client loop; serial path is the reference
    std::string out_dir = "out";
};

/// Parses the flat key=value format (dotted sections, '#' comments).
/// Unknown keys and out-of-range values raise ConfigError naming the key.
RunConfig parse_config_text(const std::string& text);

/// parse_config_text over the file's contents; the file must exist.
RunConfig parse_config(const std::string& path);

/// Model spec resolved against the configured dataset's shape.
ModelSpec resolve_model_spec(const RunConfig& cfg, const Dataset& train);

} // namespace fedsim
