#include "fedsim/partition.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fedsim/errors.hpp"

namespace fedsim {

std::size_t ClientPartition::total_samples() const {
    std::size_t n = 0;
    for (const auto& idx : client_indices) n += idx.size();
    return n;
}

namespace {

// Largest-remainder rounding of proportions to integer counts summing to n.
// Ties on the fractional part go to the lower client index.
std::vector<std::size_t> proportional_counts(const std::vector<double>& props, std::size_t n) {
    const std::size_t m = props.size();
    std::vector<std::size_t> counts(m, 0);
    std::vector<double> frac(m, 0.0);
    std::size_t assigned = 0;
    for (std::size_t i = 0; i < m; ++i) {
        const double target = props[i] * static_cast<double>(n);
        counts[i] = static_cast<std::size_t>(std::floor(target));
        frac[i] = target - static_cast<double>(counts[i]);
        assigned += counts[i];
    }
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return frac[a] > frac[b]; });
    for (std::size_t r = 0; assigned < n; ++r) {
        counts[order[r % m]] += 1;
        ++assigned;
    }
    return counts;
}

} // namespace

ClientPartition dirichlet_partition(const Dataset& ds, const PartitionSpec& spec) {
    if (spec.num_clients < 1) throw PartitionError("num_clients must be >= 1");
    if (!(spec.alpha > 0.0)) throw PartitionError("alpha must be > 0");
    if (spec.min_batches < 1 || spec.batch_size < 1) {
        throw PartitionError("min_batches and batch_size must be >= 1");
    }

    const std::size_t n_clients = static_cast<std::size_t>(spec.num_clients);
    const std::size_t floor_per_client =
        static_cast<std::size_t>(spec.min_batches) * static_cast<std::size_t>(spec.batch_size);
    if (ds.size() < n_clients * floor_per_client) {
        throw PartitionError("dataset too small: need " +
                             std::to_string(n_clients * floor_per_client) + " samples for " +
                             std::to_string(spec.num_clients) + " clients, have " +
                             std::to_string(ds.size()));
    }

    // Group sample indices by class, ascending.
    std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(ds.num_classes));
    for (std::size_t i = 0; i < ds.size(); ++i) {
        by_class[static_cast<std::size_t>(ds.labels[i])].push_back(i);
    }

    ClientPartition part;
    part.client_indices.assign(n_clients, {});

    for (int k = 0; k < ds.num_classes; ++k) {
        const auto& idx = by_class[static_cast<std::size_t>(k)];
        if (idx.empty()) continue;

        RngStream rng(spec.seed, stream_id(StreamPurpose::dirichlet, static_cast<std::uint64_t>(k)));
        std::vector<double> props(n_clients, 0.0);
        double sum = 0.0;
        for (std::size_t i = 0; i < n_clients; ++i) {
            props[i] = rng.next_gamma(spec.alpha);
            sum += props[i];
        }
        if (!(sum > 0.0) || !std::isfinite(sum)) {
            // All draws underflowed; fall back to a uniform split.
            std::fill(props.begin(), props.end(), 1.0 / static_cast<double>(n_clients));
        } else {
            for (auto& p : props) p /= sum;
        }

        const auto counts = proportional_counts(props, idx.size());
        std::size_t cursor = 0;
        for (std::size_t i = 0; i < n_clients; ++i) {
            auto& dst = part.client_indices[i];
            dst.insert(dst.end(), idx.begin() + static_cast<std::ptrdiff_t>(cursor),
                       idx.begin() + static_cast<std::ptrdiff_t>(cursor + counts[i]));
            cursor += counts[i];
        }
    }

    // Deficit repair: move samples from the largest clients into any client
    // below the floor. Feasibility was checked above, so a donor above the
    // floor always exists while a deficit remains.
    for (;;) {
        std::size_t deficit_client = n_clients;
        for (std::size_t i = 0; i < n_clients; ++i) {
            if (part.client_indices[i].size() < floor_per_client) {
                deficit_client = i;
                break;
            }
        }
        if (deficit_client == n_clients) break;

        std::size_t donor = n_clients;
        std::size_t donor_size = 0;
        for (std::size_t i = 0; i < n_clients; ++i) {
            if (part.client_indices[i].size() > donor_size) {
                donor_size = part.client_indices[i].size();
                donor = i;
            }
        }
        if (donor == n_clients || donor_size <= floor_per_client) {
            throw PartitionError("deficit repair failed: no donor above the floor");
        }

        const std::size_t need = floor_per_client - part.client_indices[deficit_client].size();
        const std::size_t avail = donor_size - floor_per_client;
        const std::size_t take = std::min(need, avail);
        auto& src = part.client_indices[donor];
        auto& dst = part.client_indices[deficit_client];
        dst.insert(dst.end(), src.end() - static_cast<std::ptrdiff_t>(take), src.end());
        src.erase(src.end() - static_cast<std::ptrdiff_t>(take), src.end());
    }

    for (auto& idx : part.client_indices) std::sort(idx.begin(), idx.end());

    const double total = static_cast<double>(part.total_samples());
    part.weights.resize(n_clients);
    for (std::size_t i = 0; i < n_clients; ++i) {
        part.weights[i] = static_cast<double>(part.client_indices[i].size()) / total;
    }
    return part;
}

std::vector<std::vector<std::size_t>> epoch_batches(const ClientPartition& part, int client,
                                                    int batch_size, RngStream& rng) {
    if (client < 0 || client >= part.num_clients()) {
        throw PartitionError("epoch_batches: client index out of range");
    }
    if (batch_size < 1) throw PartitionError("epoch_batches: batch_size must be >= 1");

    std::vector<std::size_t> order = part.client_indices[static_cast<std::size_t>(client)];
    rng.shuffle(order);

    std::vector<std::vector<std::size_t>> batches;
    const std::size_t b = static_cast<std::size_t>(batch_size);
    for (std::size_t start = 0; start < order.size(); start += b) {
        const std::size_t end = std::min(start + b, order.size());
        batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                             order.begin() + static_cast<std::ptrdiff_t>(end));
    }
    return batches;
}

double label_entropy(const Dataset& ds, const std::vector<std::size_t>& indices, int num_classes) {
    if (indices.empty()) return 0.0;
    std::vector<double> counts(static_cast<std::size_t>(num_classes), 0.0);
    for (const std::size_t i : indices) counts[static_cast<std::size_t>(ds.labels[i])] += 1.0;
    double h = 0.0;
    const double n = static_cast<double>(indices.size());
    for (const double c : counts) {
        if (c > 0.0) {
            const double q = c / n;
            h -= q * std::log(q);
        }
    }
    return h;
}

} // namespace fedsim
