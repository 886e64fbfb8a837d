#include "ocltx/eval/ablation.hpp"

#include <algorithm>
#include <stdexcept>

#include "ocltx/errors.hpp"
#include "ocltx/model/params.hpp"

namespace ocltx::eval {

std::string to_string(AblationKind kind) {
    switch (kind) {
        case AblationKind::none: return "none";
        case AblationKind::no_image: return "no_image";
        case AblationKind::no_attention: return "no_attention";
    }
    return "none";
}

AblationKind parse_ablation(const std::string& s) {
    if (s == "none" || s.empty()) return AblationKind::none;
    if (s == "no_image") return AblationKind::no_image;
    if (s == "no_attention") return AblationKind::no_attention;
    throw ConfigError("run.ablation", "unknown ablation '" + s + "' (expected none, no_image or no_attention)");
}

model::ModelConfig apply_ablation(model::ModelConfig config, AblationKind kind) {
    if (kind == AblationKind::no_image) config.use_features = false;
    if (kind == AblationKind::no_attention) config.window = 0;
    return config;
}

Summary run_ablation(AblationKind kind, const model::ModelConfig& config, const streams::TrainerConfig& trainer,
                     std::shared_ptr<const data::ExampleSource> source, std::uint64_t model_seed) {
    const auto ablated = apply_ablation(config, kind);
    auto params = model::init_params<float>(ablated, model_seed);
    auto result = streams::train_sequence(ablated, params, std::move(source), trainer);
    auto summary = summarize(result.log);
    summary.macs_total = result.macs_total;
    return summary;
}

std::vector<streams::UpdateGate> gradient_stop_schedule(std::span<const std::int64_t> positions) {
    if (!std::is_sorted(positions.begin(), positions.end()))
        throw std::invalid_argument("gradient_stop_schedule: positions must be sorted");
    std::vector<streams::UpdateGate> gates;
    for (auto stop : positions) {
        if (stop < 0) throw std::invalid_argument("gradient_stop_schedule: negative position");
        gates.push_back([stop](std::int64_t chunk_end) { return chunk_end <= stop; });
    }
    return gates;
}

}  // namespace ocltx::eval
