#pragma once

#include <cstdint>

#include "ocltx/model/config.hpp"

namespace ocltx::eval {

// MACs of a dense projection applied to `tokens` rows.
constexpr std::uint64_t linear_macs(std::uint64_t tokens, std::uint64_t d_in, std::uint64_t d_out) {
    return tokens * d_in * d_out;
}

// Forward MACs of one chunk of `examples` examples whose first example sits
// at `first_example` in a stream whose caches were empty at example 0.
// Counts every matmul and the attention score/value products over the keys
// each query can see; elementwise work and the feature extractor are free.
std::uint64_t macs_forward(const model::ModelConfig& config, std::int64_t examples, std::int64_t first_example);

// Same, with a saturated window (every query sees its full window).
std::uint64_t macs_forward_saturated(const model::ModelConfig& config, std::int64_t examples);

// Projection (non-attention) MACs of a single block for `tokens` rows.
std::uint64_t block_projection_macs(const model::ModelConfig& config, std::uint64_t tokens);

// Forward plus backward is charged as three forward passes.
constexpr std::uint64_t training_macs(std::uint64_t forward_macs) { return 3 * forward_macs; }

}  // namespace ocltx::eval
