#include "ocltx/numerics/adamw.hpp"

#include <cmath>

#include "ocltx/errors.hpp"

namespace ocltx::num {

template <class T>
AdamWState<T>::AdamWState(AdamWConfig cfg, std::span<const Tensor<T>> params, std::vector<bool> decay_mask)
    : config(cfg), decayed(std::move(decay_mask)) {
    if (decayed.empty()) decayed.assign(params.size(), true);
    if (decayed.size() != params.size()) {
        throw DimensionError("AdamWState: decay mask has " + std::to_string(decayed.size()) + " entries for " +
                             std::to_string(params.size()) + " parameters");
    }
    first_moment.reserve(params.size());
    second_moment.reserve(params.size());
    for (const auto& p : params) {
        first_moment.emplace_back(p.size(), T(0));
        second_moment.emplace_back(p.size(), T(0));
    }
}

template <class T>
void adamw_step(std::span<Tensor<T>> params, AdamWState<T>& state) {
    if (params.size() != state.first_moment.size()) {
        throw DimensionError("adamw_step: " + std::to_string(params.size()) + " parameters but state tracks " +
                             std::to_string(state.first_moment.size()));
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (params[i].size() != state.first_moment[i].size()) {
            throw DimensionError("adamw_step: parameter " + std::to_string(i) + " has shape " +
                                 shape_str(params[i].shape()) + " but its moments hold " +
                                 std::to_string(state.first_moment[i].size()) + " values");
        }
        for (auto g : params[i].grad()) {
            if (!std::isfinite(g)) {
                throw NonFiniteError("non-finite gradient in parameter " + std::to_string(i) + " at optimizer step " +
                                         std::to_string(state.step_count),
                                     state.step_count);
            }
        }
    }

    const auto& c = state.config;
    const std::int64_t step = ++state.step_count;
    const double bc1 = 1.0 - std::pow(c.beta1, double(step));
    const double bc2 = 1.0 - std::pow(c.beta2, double(step));
    const T b1 = T(c.beta1), b2 = T(c.beta2);
    const T decay_factor = T(1.0 - c.learning_rate * c.weight_decay);

    for (std::size_t i = 0; i < params.size(); ++i) {
        auto values = params[i].mutable_values();
        auto grad = params[i].grad();
        auto& m = state.first_moment[i];
        auto& v = state.second_moment[i];
        const T decay = state.decayed[i] ? decay_factor : T(1);
        for (std::size_t j = 0; j < values.size(); ++j) {
            T g = grad.empty() ? T(0) : grad[j];
            m[j] = b1 * m[j] + (T(1) - b1) * g;
            v[j] = b2 * v[j] + (T(1) - b2) * g * g;
            double m_hat = double(m[j]) / bc1;
            double v_hat = double(v[j]) / bc2;
            values[j] = values[j] * decay - T(c.learning_rate * m_hat / (std::sqrt(v_hat) + c.epsilon));
        }
    }
}

template <class T>
void zero_grads(std::span<Tensor<T>> params) {
    for (auto& p : params) p.zero_grad();
}

template struct AdamWState<float>;
template struct AdamWState<double>;
template void adamw_step(std::span<Tensor<float>>, AdamWState<float>&);
template void adamw_step(std::span<Tensor<double>>, AdamWState<double>&);
template void zero_grads(std::span<Tensor<float>>);
template void zero_grads(std::span<Tensor<double>>);

}  // namespace ocltx::num
