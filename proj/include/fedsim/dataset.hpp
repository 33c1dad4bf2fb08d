#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fedsim/param_vector.hpp"
#include "fedsim/rng.hpp"

namespace fedsim {

/// Labeled samples with a shared feature dimension.
struct Dataset {
    std::vector<ParamVector> features;
    std::vector<int> labels;
    int num_classes = 0;

    std::size_t size() const { return features.size(); }
    int dim() const { return features.empty() ? 0 : static_cast<int>(features[0].size()); }
};

/// Throws DimensionError / FormatError if the invariants are broken
/// (mismatched feature dims, labels out of range).
void validate_dataset(const Dataset& ds);

/// Gaussian blobs: one unit random direction per class scaled by
/// `separation`, unit isotropic noise around it. Samples are ordered
/// class-major. Deterministic given the seed.
Dataset make_synthetic(int num_classes, int dim, int samples_per_class,
                       double separation, std::uint64_t seed);

/// Loads an IDX image/label file pair (big-endian, magic 0x00000803 for
/// images and 0x00000801 for labels). Pixels are scaled to [0,1].
Dataset load_idx(const std::string& images_path, const std::string& labels_path);

} // namespace fedsim
