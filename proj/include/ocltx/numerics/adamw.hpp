#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ocltx/numerics/tensor.hpp"

namespace ocltx::num {

struct AdamWConfig {
    double learning_rate = 1e-3;
    double weight_decay = 0.0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

template <class T>
struct AdamWState {
    AdamWConfig config;
    std::vector<std::vector<T>> first_moment;
    std::vector<std::vector<T>> second_moment;
    std::vector<bool> decayed;  // per parameter; weight decay is skipped where false
    std::int64_t step_count = 0;

    AdamWState() = default;
    // Decays every parameter unless `decay_mask` is given.
    AdamWState(AdamWConfig cfg, std::span<const Tensor<T>> params, std::vector<bool> decay_mask = {});
};

// One decoupled-weight-decay Adam update using the gradients currently
// accumulated on `params`:
//
//   p <- p * (1 - lr * wd) - lr * m_hat / (sqrt(v_hat) + eps)
//
// Gradients are left untouched. Throws NonFiniteError (with the step index)
// before modifying anything if a gradient is NaN or infinite.
template <class T>
void adamw_step(std::span<Tensor<T>> params, AdamWState<T>& state);

template <class T>
void zero_grads(std::span<Tensor<T>> params);

}  // namespace ocltx::num
