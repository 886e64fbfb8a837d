#pragma once

#include <algorithm>
#include <cmath>
#include <span>

#include "ocltx/numerics/tensor.hpp"

namespace ocltx::num {

// Compares reverse-mode gradients of the scalar `loss()` against central
// differences, perturbing every element of every parameter in place (and
// restoring it). Returns max |a - n| / max(|a|, |n|, 1e-8) over all elements.
//
// `loss` must rebuild its graph from the current parameter values on each
// call.
template <class F>
double grad_check(F&& loss, std::span<Tensor<double>> params, double h = 1e-5) {
    for (auto& p : params) p.zero_grad();
    loss().backward();

    double worst = 0.0;
    for (auto& p : params) {
        auto analytic = p.grad_or_zeros();
        auto values = p.mutable_values();
        for (std::size_t i = 0; i < values.size(); ++i) {
            const double saved = values[i];
            values[i] = saved + h;
            const double up = loss().item();
            values[i] = saved - h;
            const double down = loss().item();
            values[i] = saved;
            const double numeric = (up - down) / (2.0 * h);
            const double a = analytic[i];
            const double denom = std::max({std::abs(a), std::abs(numeric), 1e-8});
            worst = std::max(worst, std::abs(a - numeric) / denom);
        }
    }
    return worst;
}

}  // namespace ocltx::num
