#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ocltx/numerics/tensor.hpp"

namespace ocltx::num {

// Binary attention mask, row-major [rows, cols]; 1 = attendable.
struct Mask {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::uint8_t> bits;

    Mask() = default;
    Mask(std::size_t r, std::size_t c, std::uint8_t fill = 0) : rows(r), cols(c), bits(r * c, fill) {}

    bool at(std::size_t r, std::size_t c) const { return bits[r * cols + c] != 0; }
    void set(std::size_t r, std::size_t c, bool on) { bits[r * cols + c] = on ? 1 : 0; }
};

template <class T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b);

template <class T>
Tensor<T> transpose(const Tensor<T>& a);

template <class T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b);

// Elementwise product.
template <class T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b);

template <class T>
Tensor<T> scale(const Tensor<T>& a, T factor);

// Exact (erf-based) GELU.
template <class T>
Tensor<T> gelu(const Tensor<T>& x);

// Normalizes over the last axis, then applies `scale * x + offset`.
template <class T>
Tensor<T> layer_norm(const Tensor<T>& x, const Tensor<T>& scale, const Tensor<T>& offset, T eps = T(1e-6));

// Row softmax restricted to unmasked entries. Masked entries are exactly 0
// and a fully masked row is all zeros.
template <class T>
Tensor<T> masked_softmax(const Tensor<T>& logits, const Mask& mask);

// Per-row negative log-likelihood of `labels` under softmax(logits); logits
// are [n, K] and the result has shape [n].
template <class T>
Tensor<T> cross_entropy(const Tensor<T>& logits, std::span<const int> labels);

// Scalar form for a single logit vector of shape [K].
template <class T>
Tensor<T> cross_entropy(const Tensor<T>& logits, int label);

template <class T>
Tensor<T> sum(const Tensor<T>& x);

template <class T>
Tensor<T> mean(const Tensor<T>& x);

template <class T>
Tensor<T> reshape(const Tensor<T>& x, Shape shape);

// Stacks rows of a [m, n] on top of b [k, n].
template <class T>
Tensor<T> concat_rows(const Tensor<T>& a, const Tensor<T>& b);

template <class T>
Tensor<T> take_rows(const Tensor<T>& x, std::span<const std::size_t> rows);

// [a0, b0, a1, b1, ...] for equally shaped a, b.
template <class T>
Tensor<T> interleave_rows(const Tensor<T>& a, const Tensor<T>& b);

// Broadcasts a single row ([1, n] or [n]) to [count, n].
template <class T>
Tensor<T> repeat_rows(const Tensor<T>& row, std::size_t count);

// Rotary position embedding. `x` is [rows, heads * head_dim]; within every
// head the first `rotary_dims` features are rotated pairwise by angles
// position * base^(-2i / rotary_dims).
template <class T>
Tensor<T> rotary(const Tensor<T>& x, std::span<const std::int64_t> positions, std::size_t head_dim,
                 std::size_t rotary_dims, double base = 10000.0);

template <class T>
Tensor<T> one_hot(std::span<const int> labels, std::size_t num_classes);

// Lowest index wins ties.
template <class T>
std::size_t argmax(std::span<const T> values);

}  // namespace ocltx::num
