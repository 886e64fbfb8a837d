#include "ocltx/eval/macs.hpp"

#include <algorithm>

namespace ocltx::eval {

using model::Variant;

std::uint64_t block_projection_macs(const model::ModelConfig& c, std::uint64_t tokens) {
    const std::uint64_t d = c.width, h = c.num_query_heads, dk = c.key_dim, dv = c.value_dim, f = c.ffw_width();
    std::uint64_t m = linear_macs(tokens, d, f) + linear_macs(tokens, f, d);   // feed-forward
    m += linear_macs(tokens, d, h * dk) + linear_macs(tokens, d, dk) + linear_macs(tokens, d, dv);
    if (c.variant == Variant::pi) {
        m += linear_macs(tokens, c.num_classes, dk) + linear_macs(tokens, c.num_classes, dv);
    }
    m += linear_macs(tokens, h * dv, d);
    return m;
}

std::uint64_t macs_forward(const model::ModelConfig& c, std::int64_t examples, std::int64_t first_example) {
    if (examples <= 0) return 0;
    const std::uint64_t n = examples, tpe = c.tokens_per_example(), tokens = n * tpe;
    const std::uint64_t h = c.num_query_heads, dk = c.key_dim, dv = c.value_dim;

    std::uint64_t m = 0;
    if (c.use_features) m += linear_macs(n, c.feature_dim, c.width);
    if (c.variant == Variant::two_token) m += linear_macs(n, c.num_classes, c.width);

    // Keys visible to each query: strictly earlier tokens for pi, the token
    // itself as well for two_token, limited to the window either way.
    std::uint64_t key_count = 0;
    const std::int64_t first_token = first_example * std::int64_t(tpe);
    const std::int64_t window = c.window;
    for (std::uint64_t i = 0; i < tokens; ++i) {
        const std::int64_t p = first_token + std::int64_t(i);
        key_count += c.variant == Variant::pi ? std::min(p, window) : std::min(p + 1, window + 1);
    }
    const std::uint64_t per_block = block_projection_macs(c, tokens) + key_count * h * (dk + dv);
    m += per_block * std::uint64_t(c.depth);

    m += linear_macs(n, c.width, c.num_classes);
    return m;
}

std::uint64_t macs_forward_saturated(const model::ModelConfig& c, std::int64_t examples) {
    return macs_forward(c, examples, std::int64_t(c.window) + 1);
}

}  // namespace ocltx::eval
