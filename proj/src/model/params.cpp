#include "ocltx/model/params.hpp"

#include <cmath>
#include <random>

namespace ocltx::model {

using num::Tensor;

namespace {

template <class T>
Tensor<T> gaussian(std::mt19937_64& rng, std::size_t rows, std::size_t cols, double stddev) {
    std::normal_distribution<double> dist(0.0, stddev);
    std::vector<T> v(rows * cols);
    for (auto& x : v) x = T(dist(rng));
    return Tensor<T>({rows, cols}, std::move(v), true);
}

template <class T>
Tensor<T> constant(std::size_t n, T value) {
    return Tensor<T>::filled({n}, value, true);
}

}  // namespace

template <class T>
std::vector<Tensor<T>> ModelParams<T>::list() const {
    std::vector<Tensor<T>> out;
    auto put = [&](const Tensor<T>& t) {
        if (t.defined()) out.push_back(t);
    };
    put(w_in);
    put(input_token);
    put(label_embedding);
    for (const auto& b : blocks) {
        put(b.ln_scale);
        put(b.ln_offset);
        put(b.w_up);
        put(b.w_down);
        put(b.w_q);
        put(b.w_k);
        put(b.w_v);
        put(b.w_k_label);
        put(b.w_v_label);
        put(b.w_out);
    }
    put(final_ln_scale);
    put(final_ln_offset);
    put(w_head);
    return out;
}

template <class T>
std::vector<std::string> ModelParams<T>::names() const {
    std::vector<std::string> out;
    auto put = [&](const Tensor<T>& t, const std::string& name) {
        if (t.defined()) out.push_back(name);
    };
    put(w_in, "w_in");
    put(input_token, "input_token");
    put(label_embedding, "label_embedding");
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        const auto& b = blocks[i];
        const std::string p = "block" + std::to_string(i) + ".";
        put(b.ln_scale, p + "ln_scale");
        put(b.ln_offset, p + "ln_offset");
        put(b.w_up, p + "w_up");
        put(b.w_down, p + "w_down");
        put(b.w_q, p + "w_q");
        put(b.w_k, p + "w_k");
        put(b.w_v, p + "w_v");
        put(b.w_k_label, p + "w_k_label");
        put(b.w_v_label, p + "w_v_label");
        put(b.w_out, p + "w_out");
    }
    put(final_ln_scale, "final_ln_scale");
    put(final_ln_offset, "final_ln_offset");
    put(w_head, "w_head");
    return out;
}

template <class T>
std::size_t ModelParams<T>::count() const {
    std::size_t n = 0;
    for (const auto& t : list()) n += t.size();
    return n;
}

template <class T>
ModelParams<T> init_params(const ModelConfig& config, std::uint64_t seed) {
    config.validate();
    std::mt19937_64 rng(seed);
    const std::size_t d = config.width, f = config.feature_dim, k = config.num_classes;
    const std::size_t h = config.num_query_heads, dk = config.key_dim, dv = config.value_dim;
    const std::size_t ffw = config.ffw_width();

    ModelParams<T> p;
    if (config.use_features) {
        p.w_in = gaussian<T>(rng, f, d, 1.0 / std::sqrt(double(f)));
    } else {
        p.input_token = gaussian<T>(rng, 1, d, 1.0);
    }
    if (config.variant == Variant::two_token) p.label_embedding = gaussian<T>(rng, k, d, 1.0);

    for (int l = 0; l < config.depth; ++l) {
        BlockParams<T> b;
        b.ln_scale = constant<T>(d, T(1));
        b.ln_offset = constant<T>(d, T(0));
        b.w_up = gaussian<T>(rng, d, ffw, 1.0 / std::sqrt(double(d)));
        b.w_down = gaussian<T>(rng, ffw, d, 1.0 / std::sqrt(double(ffw)));
        b.w_q = gaussian<T>(rng, d, h * dk, 1.0 / std::sqrt(double(d)));
        b.w_k = gaussian<T>(rng, d, dk, 1.0 / std::sqrt(double(d)));
        b.w_v = gaussian<T>(rng, d, dv, 1.0 / std::sqrt(double(d)));
        if (config.variant == Variant::pi) {
            b.w_k_label = gaussian<T>(rng, k, dk, 1.0);
            b.w_v_label = gaussian<T>(rng, k, dv, 1.0);
        }
        b.w_out = gaussian<T>(rng, h * dv, d, 1.0 / std::sqrt(double(h * dv)));
        p.blocks.push_back(std::move(b));
    }
    p.final_ln_scale = constant<T>(d, T(1));
    p.final_ln_offset = constant<T>(d, T(0));
    p.w_head = Tensor<T>::zeros({d, k}, true);
    return p;
}

template <class To, class From>
ModelParams<To> cast_params(const ModelParams<From>& params) {
    auto conv = [](const Tensor<From>& t) -> Tensor<To> {
        if (!t.defined()) return {};
        std::vector<To> v(t.values().begin(), t.values().end());
        return Tensor<To>(t.shape(), std::move(v), t.requires_grad());
    };
    ModelParams<To> out;
    out.w_in = conv(params.w_in);
    out.input_token = conv(params.input_token);
    out.label_embedding = conv(params.label_embedding);
    for (const auto& b : params.blocks) {
        out.blocks.push_back({conv(b.ln_scale), conv(b.ln_offset), conv(b.w_up), conv(b.w_down), conv(b.w_q),
                              conv(b.w_k), conv(b.w_v), conv(b.w_k_label), conv(b.w_v_label), conv(b.w_out)});
    }
    out.final_ln_scale = conv(params.final_ln_scale);
    out.final_ln_offset = conv(params.final_ln_offset);
    out.w_head = conv(params.w_head);
    return out;
}

template struct ModelParams<float>;
template struct ModelParams<double>;
template ModelParams<float> init_params(const ModelConfig&, std::uint64_t);
template ModelParams<double> init_params(const ModelConfig&, std::uint64_t);
template ModelParams<float> cast_params(const ModelParams<double>&);
template ModelParams<double> cast_params(const ModelParams<float>&);
template ModelParams<float> cast_params(const ModelParams<float>&);
template ModelParams<double> cast_params(const ModelParams<double>&);

}  // namespace ocltx::model
