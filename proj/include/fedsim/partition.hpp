#pragma once

#include <cstdint>
#include <vector>

#include "fedsim/dataset.hpp"
#include "fedsim/rng.hpp"

namespace fedsim {

/// How to split a dataset across clients. `min_batches * batch_size` is the
/// per-client sample floor enforced after the Dirichlet draw.
struct PartitionSpec {
    int num_clients = 10;
    double alpha = 0.01;
    std::uint64_t seed = 0;
    int min_batches = 2;
    int batch_size = 128;
};

/// Disjoint per-client index lists into a Dataset plus sampling weights
/// p_i = |D_i| / |D|.
struct ClientPartition {
    std::vector<std::vector<std::size_t>> client_indices;
    std::vector<double> weights;

    int num_clients() const { return static_cast<int>(client_indices.size()); }
    std::size_t total_samples() const;
};

/// Per-class Dirichlet(alpha,...,alpha) proportions over clients; class
/// samples assigned by largest-remainder counts, then deficit clients are
/// topped up from the largest clients until every client holds at least
/// min_batches * batch_size samples. Pure function of (ds, spec).
ClientPartition dirichlet_partition(const Dataset& ds, const PartitionSpec& spec);

/// Shuffles the client's indices with rng and chunks them into
/// ceil(n / batch_size) batches; the last batch may be short.
std::vector<std::vector<std::size_t>> epoch_batches(const ClientPartition& part, int client,
                                                    int batch_size, RngStream& rng);

/// Shannon entropy (nats) of one client's label distribution.
double label_entropy(const Dataset& ds, const std::vector<std::size_t>& indices, int num_classes);

} // namespace fedsim
