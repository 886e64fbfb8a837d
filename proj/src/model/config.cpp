#include "ocltx/model/config.hpp"

#include <charconv>
#include <sstream>

#include "ocltx/errors.hpp"

namespace ocltx::model {

std::string to_string(Variant v) { return v == Variant::pi ? "pi" : "two_token"; }

Variant parse_variant(const std::string& s) {
    if (s == "pi") return Variant::pi;
    if (s == "two_token" || s == "2token") return Variant::two_token;
    throw ConfigError("model.variant", "unknown variant '" + s + "' (expected pi or two_token)");
}

void ModelConfig::validate() const {
    auto positive = [](int v, const char* field) {
        if (v < 1) throw ConfigError(field, "must be >= 1, got " + std::to_string(v));
    };
    positive(width, "model.width");
    positive(depth, "model.depth");
    positive(num_query_heads, "model.num_query_heads");
    positive(key_dim, "model.key_dim");
    positive(value_dim, "model.value_dim");
    positive(num_classes, "model.num_classes");
    positive(feature_dim, "model.feature_dim");
    positive(ffw_multiplier, "model.ffw_multiplier");
    if (window < 0) throw ConfigError("model.window", "must be >= 0, got " + std::to_string(window));
    if (rotary_dims < 0 || rotary_dims % 2 != 0 || rotary_dims > key_dim) {
        throw ConfigError("model.rotary_dims", "must be even and within [0, key_dim], got " + std::to_string(rotary_dims));
    }
}

namespace {

int parse_int(const std::string& key, const std::string& value) {
    int out = 0;
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc() || ptr != value.data() + value.size()) {
        throw ConfigError(key, "expected an integer, got '" + value + "'");
    }
    return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw ConfigError(key, "expected true or false, got '" + value + "'");
}

}  // namespace

std::string to_text(const ModelConfig& c) {
    std::ostringstream os;
    os << "model.variant = " << to_string(c.variant) << '\n'
       << "model.width = " << c.width << '\n'
       << "model.depth = " << c.depth << '\n'
       << "model.num_query_heads = " << c.num_query_heads << '\n'
       << "model.key_dim = " << c.key_dim << '\n'
       << "model.value_dim = " << c.value_dim << '\n'
       << "model.window = " << c.window << '\n'
       << "model.num_classes = " << c.num_classes << '\n'
       << "model.feature_dim = " << c.feature_dim << '\n'
       << "model.ffw_multiplier = " << c.ffw_multiplier << '\n'
       << "model.rotary_dims = " << c.rotary_dims << '\n'
       << "model.use_features = " << (c.use_features ? "true" : "false") << '\n';
    return os.str();
}

bool set_model_field(ModelConfig& c, const std::string& key, const std::string& value) {
    if (key.rfind("model.", 0) != 0) return false;
    if (key == "model.variant") c.variant = parse_variant(value);
    else if (key == "model.width") c.width = parse_int(key, value);
    else if (key == "model.depth") c.depth = parse_int(key, value);
    else if (key == "model.num_query_heads") c.num_query_heads = parse_int(key, value);
    else if (key == "model.key_dim") c.key_dim = parse_int(key, value);
    else if (key == "model.value_dim") c.value_dim = parse_int(key, value);
    else if (key == "model.window") c.window = parse_int(key, value);
    else if (key == "model.num_classes") c.num_classes = parse_int(key, value);
    else if (key == "model.feature_dim") c.feature_dim = parse_int(key, value);
    else if (key == "model.ffw_multiplier") c.ffw_multiplier = parse_int(key, value);
    else if (key == "model.rotary_dims") c.rotary_dims = parse_int(key, value);
    else if (key == "model.use_features") c.use_features = parse_bool(key, value);
    else throw ConfigError(key, "unknown key");
    return true;
}

long long kv_cache_floats(long long depth, long long key_dim, long long window) { return depth * key_dim * window; }

}  // namespace ocltx::model
