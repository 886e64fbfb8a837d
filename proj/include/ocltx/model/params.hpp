#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ocltx/model/config.hpp"
#include "ocltx/numerics/tensor.hpp"

namespace ocltx::model {

template <class T>
struct BlockParams {
    num::Tensor<T> ln_scale;   // [D]
    num::Tensor<T> ln_offset;  // [D]
    num::Tensor<T> w_up;       // [D, ffw]
    num::Tensor<T> w_down;     // [ffw, D]
    num::Tensor<T> w_q;        // [D, heads * dk]
    num::Tensor<T> w_k;        // [D, dk]   one key projection shared by all heads
    num::Tensor<T> w_v;        // [D, dv]
    num::Tensor<T> w_k_label;  // [K, dk]   pi variant only
    num::Tensor<T> w_v_label;  // [K, dv]   pi variant only
    num::Tensor<T> w_out;      // [heads * dv, D]
};

template <class T>
struct ModelParams {
    num::Tensor<T> w_in;             // [F, D]     when features are used
    num::Tensor<T> input_token;      // [1, D]     no-image ablation
    num::Tensor<T> label_embedding;  // [K, D]     two_token variant
    std::vector<BlockParams<T>> blocks;
    num::Tensor<T> final_ln_scale;   // [D]
    num::Tensor<T> final_ln_offset;  // [D]
    num::Tensor<T> w_head;           // [D, K]

    // Defined tensors in declaration order, with names. Handles alias the
    // parameters, so optimizer updates through them are visible here.
    std::vector<num::Tensor<T>> list() const;
    std::vector<std::string> names() const;
    std::size_t count() const;
};

// Deterministic in `seed`. Weights are Gaussian with std 1/sqrt(fan_in);
// layer-norm scales are 1 and offsets 0; the output head is zero so the first
// prediction is exactly uniform.
template <class T>
ModelParams<T> init_params(const ModelConfig& config, std::uint64_t seed);

// Converts between precisions (same layout).
template <class To, class From>
ModelParams<To> cast_params(const ModelParams<From>& params);

}  // namespace ocltx::model
