#include "ocltx/data/gaussian_blobs.hpp"

#include <cmath>
#include <random>

#include "ocltx/data/source.hpp"
#include "ocltx/errors.hpp"

namespace ocltx::data {

std::span<const float> BaseDataset::example(int cls, std::size_t index) const {
    const auto& pool = pools.at(std::size_t(cls));
    return std::span<const float>(pool).subspan(index * std::size_t(feature_dim), std::size_t(feature_dim));
}

void BaseDataset::validate() const {
    if (num_classes < 1 || feature_dim < 1 || int(pools.size()) != num_classes) {
        throw ConfigError("data.num_classes", "base dataset needs at least one class and one feature");
    }
    for (int c = 0; c < num_classes; ++c) {
        const auto& pool = pools[std::size_t(c)];
        if (pool.empty() || pool.size() % std::size_t(feature_dim) != 0) {
            throw ConfigError("data", "class " + std::to_string(c) + " has an empty or ragged pool");
        }
        for (float v : pool) {
            if (!std::isfinite(v)) throw ConfigError("data", "class " + std::to_string(c) + " has non-finite features");
        }
    }
}

BaseDataset gaussian_blob_dataset(int num_classes, int feature_dim, double cluster_spread, std::uint64_t seed,
                                  int pool_size) {
    if (num_classes < 1) throw ConfigError("data.num_classes", "must be >= 1");
    if (feature_dim < 1) throw ConfigError("data.feature_dim", "must be >= 1");
    if (pool_size < 1) throw ConfigError("data.pool_size", "must be >= 1");

    BaseDataset ds;
    ds.num_classes = num_classes;
    ds.feature_dim = feature_dim;
    ds.pools.resize(std::size_t(num_classes));
    ds.class_means.resize(std::size_t(num_classes));
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int c = 0; c < num_classes; ++c) {
        std::mt19937_64 rng(mix_seed(seed, std::uint64_t(c)));
        auto& mean = ds.class_means[std::size_t(c)];
        mean.resize(std::size_t(feature_dim));
        for (auto& m : mean) m = float(normal(rng));
        auto& pool = ds.pools[std::size_t(c)];
        pool.resize(std::size_t(pool_size) * std::size_t(feature_dim));
        for (int i = 0; i < pool_size; ++i)
            for (int j = 0; j < feature_dim; ++j)
                pool[std::size_t(i * feature_dim + j)] = float(mean[std::size_t(j)] + cluster_spread * normal(rng));
    }
    return ds;
}

}  // namespace ocltx::data
