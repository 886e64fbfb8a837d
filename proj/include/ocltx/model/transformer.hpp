#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ocltx/model/config.hpp"
#include "ocltx/model/example.hpp"
#include "ocltx/model/kv_cache.hpp"
#include "ocltx/model/params.hpp"
#include "ocltx/numerics/attention.hpp"
#include "ocltx/numerics/ops.hpp"

namespace ocltx::model {

template <class T>
struct EmbeddedChunk {
    num::Tensor<T> tokens;      // [tokens, D]
    num::Tensor<T> privileged;  // [examples, K] one-hot labels; pi variant only
    std::vector<std::int64_t> positions;  // absolute token index per row of `tokens`
};

// pi: one token per example plus its one-hot label carried alongside.
// two_token: rows [x_1, y_1, x_2, y_2, ...] with y_i a learned label embedding.
// `first_token` is the absolute index of the first emitted token.
template <class T>
EmbeddedChunk<T> embed_inputs(const ModelConfig& config, const ModelParams<T>& params,
                              std::span<const Example> chunk, std::int64_t first_token);

// mask[q][k] = 1 iff key k precedes query q (strictly for pi, inclusively for
// two_token) and lies within `window` tokens of it.
num::Mask build_attention_mask(Variant variant, std::span<const std::int64_t> query_positions,
                               std::span<const std::int64_t> key_positions, int window);

template <class T>
struct BlockTrace {
    std::vector<std::int64_t> query_positions;
    std::vector<std::int64_t> key_positions;
    num::AttentionWeights<T> attention;
};

template <class T>
struct ForwardTrace {
    std::vector<BlockTrace<T>> blocks;
};

// Parallel residual block:
//
//   h' = h + FFW(LN(h)) + Attn(LN(h))
//
// Keys and values of the chunk are computed from LN(h) (plus the label
// projections when `privileged` is defined), rotated by absolute position,
// attended over together with the cached entries, and then appended to
// `cache`. Queries never see label projections. Cached entries are
// constants for differentiation.
template <class T>
num::Tensor<T> block_forward(const ModelConfig& config, const BlockParams<T>& params, const num::Tensor<T>& h,
                             const num::Tensor<T>& privileged, std::span<const std::int64_t> positions,
                             KvCache<T>& cache, BlockTrace<T>* trace = nullptr);

// Runs every block over one chunk and returns logits [examples, K]: one row
// per example token (pi) or per x token (two_token). Advances `caches` by the
// chunk's tokens.
template <class T>
num::Tensor<T> forward_chunk(const ModelConfig& config, const ModelParams<T>& params, std::span<const Example> chunk,
                             CacheSet<T>& caches, ForwardTrace<T>* trace = nullptr);

template <class T>
CacheSet<T> make_caches(const ModelConfig& config);

}  // namespace ocltx::model
