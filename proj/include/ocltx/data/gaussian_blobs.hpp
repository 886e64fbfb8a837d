#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace ocltx::data {

// Labelled feature pools, one per underlying class.
struct BaseDataset {
    int num_classes = 0;
    int feature_dim = 0;
    std::vector<std::vector<float>> pools;  // pools[c] holds pool_size(c) * feature_dim floats
    std::vector<std::vector<float>> class_means;  // empty for loaded data

    std::size_t pool_size(int cls) const { return pools[std::size_t(cls)].size() / std::size_t(feature_dim); }
    std::span<const float> example(int cls, std::size_t index) const;

    // Throws ConfigError if a pool is empty or holds non-finite values.
    void validate() const;
};

// Class means ~ N(0, I); members = mean + spread * N(0, I). Deterministic in
// `seed`.
BaseDataset gaussian_blob_dataset(int num_classes, int feature_dim, double cluster_spread, std::uint64_t seed,
                                  int pool_size = 200);

}  // namespace ocltx::data
