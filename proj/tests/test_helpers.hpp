#pragma once

#include <utility>

#include "fedsim/dataset.hpp"

namespace fedsim::testing {

// Train/test pair drawn from the same class centers: one generation, split
// class-by-class (samples are class-major).
inline std::pair<Dataset, Dataset> split_synthetic(int classes, int dim, int train_per_class,
                                                   int test_per_class, double separation,
                                                   std::uint64_t seed) {
    const Dataset full =
        make_synthetic(classes, dim, train_per_class + test_per_class, separation, seed);
    Dataset train;
    Dataset test;
    train.num_classes = test.num_classes = classes;
    const int block = train_per_class + test_per_class;
    for (int k = 0; k < classes; ++k) {
        const std::size_t base = static_cast<std::size_t>(k) * static_cast<std::size_t>(block);
        for (int s = 0; s < train_per_class; ++s) {
            train.features.push_back(full.features[base + static_cast<std::size_t>(s)]);
            train.labels.push_back(k);
        }
        for (int s = train_per_class; s < block; ++s) {
            test.features.push_back(full.features[base + static_cast<std::size_t>(s)]);
            test.labels.push_back(k);
        }
    }
    return {std::move(train), std::move(test)};
}

} // namespace fedsim::testing
