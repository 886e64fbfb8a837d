#include "ocltx/model/transformer.hpp"

#include "ocltx/errors.hpp"

namespace ocltx::model {

using num::Tensor;

template <class T>
EmbeddedChunk<T> embed_inputs(const ModelConfig& config, const ModelParams<T>& params,
                              std::span<const Example> chunk, std::int64_t first_token) {
    if (chunk.empty()) throw DimensionError("embed_inputs: empty chunk");
    const std::size_t n = chunk.size(), f = config.feature_dim;

    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) labels[i] = chunk[i].label;

    Tensor<T> x_tokens;
    if (config.use_features) {
        std::vector<T> x(n * f);
        for (std::size_t i = 0; i < n; ++i) {
            if (chunk[i].features.size() != f) {
                throw DimensionError("embed_inputs: example " + std::to_string(i) + " has " +
                                     std::to_string(chunk[i].features.size()) + " features, model expects " +
                                     std::to_string(f));
            }
            std::copy(chunk[i].features.begin(), chunk[i].features.end(), x.begin() + i * f);
        }
        x_tokens = num::matmul(Tensor<T>({n, f}, std::move(x)), params.w_in);
    } else {
        x_tokens = num::repeat_rows(params.input_token, n);
    }

    auto labels_1h = num::one_hot<T>(labels, config.num_classes);
    EmbeddedChunk<T> out;
    if (config.variant == Variant::pi) {
        out.tokens = x_tokens;
        out.privileged = labels_1h;
        out.positions.resize(n);
    } else {
        out.tokens = num::interleave_rows(x_tokens, num::matmul(labels_1h, params.label_embedding));
        out.positions.resize(2 * n);
    }
    for (std::size_t i = 0; i < out.positions.size(); ++i) out.positions[i] = first_token + std::int64_t(i);
    return out;
}

num::Mask build_attention_mask(Variant variant, std::span<const std::int64_t> query_positions,
                               std::span<const std::int64_t> key_positions, int window) {
    num::Mask mask(query_positions.size(), key_positions.size());
    const bool strict = variant == Variant::pi;
    for (std::size_t q = 0; q < query_positions.size(); ++q) {
        const auto qp = query_positions[q];
        for (std::size_t k = 0; k < key_positions.size(); ++k) {
            const auto kp = key_positions[k];
            const bool causal = strict ? kp < qp : kp <= qp;
            mask.set(q, k, causal && qp - kp <= window);
        }
    }
    return mask;
}

template <class T>
Tensor<T> block_forward(const ModelConfig& config, const BlockParams<T>& params, const Tensor<T>& h,
                        const Tensor<T>& privileged, std::span<const std::int64_t> positions, KvCache<T>& cache,
                        BlockTrace<T>* trace) {
    const std::size_t t = h.rows();
    const std::size_t heads = config.num_query_heads, dk = config.key_dim, dv = config.value_dim;
    if (positions.size() != t) {
        throw DimensionError("block_forward: " + std::to_string(positions.size()) + " positions for " +
                             std::to_string(t) + " rows");
    }
    if (cache.key_dim() != dk || cache.value_dim() != dv || cache.capacity() != std::size_t(config.window)) {
        throw ConfigError("kv_cache", "cache geometry (capacity " + std::to_string(cache.capacity()) + ", dk " +
                                          std::to_string(cache.key_dim()) + ", dv " + std::to_string(cache.value_dim()) +
                                          ") does not match the model configuration");
    }
    if (cache.total_tokens_seen() != positions.front()) {
        throw StateError("block_forward: cache has seen " + std::to_string(cache.total_tokens_seen()) +
                         " tokens but the chunk starts at token " + std::to_string(positions.front()));
    }

    auto hbar = num::layer_norm(h, params.ln_scale, params.ln_offset, T(1e-6));
    auto ffw = num::matmul(num::gelu(num::matmul(hbar, params.w_up)), params.w_down);

    auto q = num::matmul(hbar, params.w_q);
    auto k = num::matmul(hbar, params.w_k);
    auto v = num::matmul(hbar, params.w_v);
    if (privileged.defined()) {
        k = num::add(k, num::matmul(privileged, params.w_k_label));
        v = num::add(v, num::matmul(privileged, params.w_v_label));
    }
    const std::size_t rot = config.rotary_dims;
    if (rot > 0) {
        q = num::rotary(q, positions, dk, rot);
        k = num::rotary(k, positions, dk, rot);
    }

    std::vector<std::int64_t> key_positions;
    key_positions.reserve(cache.size() + t);
    for (std::size_t i = 0; i < cache.size(); ++i) key_positions.push_back(cache.oldest_position() + std::int64_t(i));
    key_positions.insert(key_positions.end(), positions.begin(), positions.end());

    Tensor<T> keys = k, values = v;
    if (cache.size() > 0) {
        keys = num::concat_rows(Tensor<T>({cache.size(), dk}, cache.ordered_keys()), k);
        values = num::concat_rows(Tensor<T>({cache.size(), dv}, cache.ordered_values()), v);
    }
    auto mask = build_attention_mask(config.variant, positions, key_positions, config.window);
    num::AttentionWeights<T>* weights = trace ? &trace->attention : nullptr;
    auto attn = num::matmul(num::mqa_attention(q, keys, values, mask, heads, weights), params.w_out);

    if (trace) {
        trace->query_positions.assign(positions.begin(), positions.end());
        trace->key_positions = key_positions;
    }
    cache.push_rows(k.values(), v.values(), t);

    return num::add(num::add(h, ffw), attn);
}

template <class T>
Tensor<T> forward_chunk(const ModelConfig& config, const ModelParams<T>& params, std::span<const Example> chunk,
                        CacheSet<T>& caches, ForwardTrace<T>* trace) {
    if (caches.depth() != std::size_t(config.depth) || params.blocks.size() != std::size_t(config.depth)) {
        throw ConfigError("model.depth", "model has " + std::to_string(config.depth) + " blocks but received " +
                                             std::to_string(params.blocks.size()) + " parameter blocks and " +
                                             std::to_string(caches.depth()) + " caches");
    }
    const std::int64_t first = caches.total_tokens_seen();
    auto emb = embed_inputs(config, params, chunk, first);

    if (trace) trace->blocks.assign(config.depth, {});
    auto h = emb.tokens;
    for (int l = 0; l < config.depth; ++l) {
        h = block_forward(config, params.blocks[l], h, emb.privileged, emb.positions, caches.block(l),
                          trace ? &trace->blocks[l] : nullptr);
    }

    if (config.variant == Variant::two_token) {
        std::vector<std::size_t> x_rows(chunk.size());
        for (std::size_t i = 0; i < x_rows.size(); ++i) x_rows[i] = 2 * i;
        h = num::take_rows(h, x_rows);
    }
    auto hf = num::layer_norm(h, params.final_ln_scale, params.final_ln_offset, T(1e-6));
    return num::matmul(hf, params.w_head);
}

template <class T>
CacheSet<T> make_caches(const ModelConfig& config) {
    return CacheSet<T>(config.depth, config.window, config.key_dim, config.value_dim);
}

#define OCLTX_INSTANTIATE(T)                                                                                     \
    template EmbeddedChunk<T> embed_inputs(const ModelConfig&, const ModelParams<T>&, std::span<const Example>, \
                                           std::int64_t);                                                        \
    template Tensor<T> block_forward(const ModelConfig&, const BlockParams<T>&, const Tensor<T>&,                \
                                     const Tensor<T>&, std::span<const std::int64_t>, KvCache<T>&,               \
                                     BlockTrace<T>*);                                                            \
    template Tensor<T> forward_chunk(const ModelConfig&, const ModelParams<T>&, std::span<const Example>,        \
                                     CacheSet<T>&, ForwardTrace<T>*);                                            \
    template CacheSet<T> make_caches(const ModelConfig&);

OCLTX_INSTANTIATE(float)
OCLTX_INSTANTIATE(double)

#undef OCLTX_INSTANTIATE

}  // namespace ocltx::model
