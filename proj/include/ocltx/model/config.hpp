#pragma once

#include <string>
#include <vector>

namespace ocltx::model {

enum class Variant { pi, two_token };

std::string to_string(Variant v);
Variant parse_variant(const std::string& s);

struct ModelConfig {
    Variant variant = Variant::pi;
    int width = 64;             // D
    int depth = 2;              // number of blocks
    int num_query_heads = 4;
    int key_dim = 16;           // per-head query/key width
    int value_dim = 16;
    int window = 512;           // C, in tokens
    int num_classes = 10;       // K
    int feature_dim = 32;       // F
    int ffw_multiplier = 4;     // hidden width = ffw_multiplier * D
    int rotary_dims = 8;        // rotated features per head (even, <= key_dim)
    bool use_features = true;   // false: inputs replaced by a learned constant token

    int ffw_width() const { return ffw_multiplier * width; }
    // Tokens per example: 1 (pi) or 2 (two_token).
    int tokens_per_example() const { return variant == Variant::pi ? 1 : 2; }

    // Throws ConfigError naming the first invalid field.
    void validate() const;
};

// "model.<field> = <value>" lines for every field, in a fixed order.
std::string to_text(const ModelConfig& config);

// Assigns one "model.*" key. Returns false for keys outside the model
// section; throws ConfigError for unknown model keys or unparsable values.
bool set_model_field(ModelConfig& config, const std::string& key, const std::string& value);

// Floats held by one cached tensor (keys or values) of a model:
// depth * key_dim * window.
long long kv_cache_floats(long long depth, long long key_dim, long long window);

}  // namespace ocltx::model
