#include "fedsim/dataset.hpp"

#include <cstdio>
#include <fstream>

#include "fedsim/errors.hpp"

namespace fedsim {

void validate_dataset(const Dataset& ds) {
    if (ds.num_classes <= 0) throw FormatError("dataset: num_classes must be positive");
    const int d = ds.dim();
    if (ds.features.size() != ds.labels.size()) {
        throw FormatError("dataset: feature/label count mismatch");
    }
    for (std::size_t i = 0; i < ds.size(); ++i) {
        if (static_cast<int>(ds.features[i].size()) != d) {
            throw DimensionError("dataset: sample " + std::to_string(i) + " has wrong dimension");
        }
        if (ds.labels[i] < 0 || ds.labels[i] >= ds.num_classes) {
            throw FormatError("dataset: label out of range at sample " + std::to_string(i));
        }
    }
}

Dataset make_synthetic(int num_classes, int dim, int samples_per_class,
                       double separation, std::uint64_t seed) {
    if (num_classes <= 0 || dim <= 0 || samples_per_class <= 0) {
        throw ConfigError("make_synthetic: num_classes, dim, samples_per_class must be positive");
    }
    if (separation < 0.0) throw ConfigError("make_synthetic: separation must be >= 0");

    RngStream rng(seed, stream_id(StreamPurpose::synthetic));

    // Class centers: unit random directions scaled by separation.
    std::vector<ParamVector> centers;
    centers.reserve(static_cast<std::size_t>(num_classes));
    for (int k = 0; k < num_classes; ++k) {
        ParamVector c(static_cast<std::size_t>(dim));
        for (int j = 0; j < dim; ++j) c[static_cast<std::size_t>(j)] = rng.next_gaussian();
        const double n = norm(c);
        if (n > 0.0) scale_inplace(c, separation / n);
        centers.push_back(std::move(c));
    }

    Dataset ds;
    ds.num_classes = num_classes;
    ds.features.reserve(static_cast<std::size_t>(num_classes) * samples_per_class);
    ds.labels.reserve(ds.features.capacity());
    for (int k = 0; k < num_classes; ++k) {
        for (int s = 0; s < samples_per_class; ++s) {
            ParamVector x(static_cast<std::size_t>(dim));
            for (int j = 0; j < dim; ++j) {
                x[static_cast<std::size_t>(j)] = centers[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)] + rng.next_gaussian();
            }
            ds.features.push_back(std::move(x));
            ds.labels.push_back(k);
        }
    }
    return ds;
}

namespace {

std::uint32_t read_be_u32(std::ifstream& f, const std::string& path, std::size_t offset) {
    unsigned char buf[4];
    f.read(reinterpret_cast<char*>(buf), 4);
    if (f.gcount() != 4) {
        throw FormatError(path + ": truncated at byte " + std::to_string(offset));
    }
    return (static_cast<std::uint32_t>(buf[0]) << 24) | (static_cast<std::uint32_t>(buf[1]) << 16) |
           (static_cast<std::uint32_t>(buf[2]) << 8) | static_cast<std::uint32_t>(buf[3]);
}

} // namespace

Dataset load_idx(const std::string& images_path, const std::string& labels_path) {
    std::ifstream img(images_path, std::ios::binary);
    if (!img) throw FormatError(images_path + ": cannot open");
    std::ifstream lab(labels_path, std::ios::binary);
    if (!lab) throw FormatError(labels_path + ": cannot open");

    const std::uint32_t img_magic = read_be_u32(img, images_path, 0);
    if (img_magic != 0x00000803u) {
        throw FormatError(images_path + ": bad magic " + std::to_string(img_magic) + " at byte 0");
    }
    const std::uint32_t n_images = read_be_u32(img, images_path, 4);
    const std::uint32_t rows = read_be_u32(img, images_path, 8);
    const std::uint32_t cols = read_be_u32(img, images_path, 12);

    const std::uint32_t lab_magic = read_be_u32(lab, labels_path, 0);
    if (lab_magic != 0x00000801u) {
        throw FormatError(labels_path + ": bad magic " + std::to_string(lab_magic) + " at byte 0");
    }
    const std::uint32_t n_labels = read_be_u32(lab, labels_path, 4);

    if (n_images != n_labels) {
        throw FormatError(images_path + ": image count " + std::to_string(n_images) +
                          " != label count " + std::to_string(n_labels));
    }

    const std::size_t pixels = static_cast<std::size_t>(rows) * cols;
    Dataset ds;
    ds.features.reserve(n_images);
    ds.labels.reserve(n_images);

    std::vector<unsigned char> buf(pixels);
    for (std::uint32_t i = 0; i < n_images; ++i) {
        img.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(pixels));
        if (static_cast<std::size_t>(img.gcount()) != pixels) {
            throw FormatError(images_path + ": truncated at byte " +
                              std::to_string(16 + static_cast<std::size_t>(i) * pixels +
                                             static_cast<std::size_t>(img.gcount())));
        }
        ParamVector x(pixels);
        for (std::size_t p = 0; p < pixels; ++p) x[p] = static_cast<double>(buf[p]) / 255.0;
        ds.features.push_back(std::move(x));
    }

    int max_label = 0;
    for (std::uint32_t i = 0; i < n_labels; ++i) {
        char b = 0;
        lab.read(&b, 1);
        if (lab.gcount() != 1) {
            throw FormatError(labels_path + ": truncated at byte " + std::to_string(8 + i));
        }
        const int y = static_cast<unsigned char>(b);
        ds.labels.push_back(y);
        if (y > max_label) max_label = y;
    }
    ds.num_classes = max_label + 1;
    return ds;
}

} // namespace fedsim
