#pragma once

#include <vector>

#include "ocltx/numerics/ops.hpp"
#include "ocltx/numerics/tensor.hpp"

namespace ocltx::num {

// Dense copy of the attention weights of one call, [rows * heads, keys].
// Row r * heads + h holds head h of query r.
template <class T>
struct AttentionWeights {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<T> weights;

    T at(std::size_t row, std::size_t col) const { return weights[row * cols + col]; }
};

// Multi-query attention: `heads` query heads share a single key and value
// sequence.
//
//   q    [t, heads * dk]   per-head queries, concatenated per row
//   k    [n, dk]
//   v    [n, dv]
//   mask [t, n]
//
// Returns [t, heads * dv]. Scores are scaled by 1/sqrt(dk) and normalized
// with masked_softmax semantics. Work is restricted to the span between the
// first and last attendable key of each query; for banded (sliding window)
// masks that is exactly the attendable set, and the MAC counter is charged
// heads * span * (dk + dv) per query.
template <class T>
Tensor<T> mqa_attention(const Tensor<T>& q, const Tensor<T>& k, const Tensor<T>& v, const Mask& mask,
                        std::size_t heads, AttentionWeights<T>* weights_out = nullptr);

}  // namespace ocltx::num
