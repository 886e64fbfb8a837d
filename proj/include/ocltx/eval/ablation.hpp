#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "ocltx/data/source.hpp"
#include "ocltx/eval/metrics.hpp"
#include "ocltx/model/config.hpp"
#include "ocltx/streams/trainer.hpp"

namespace ocltx::eval {

enum class AblationKind { none, no_image, no_attention };

std::string to_string(AblationKind kind);
AblationKind parse_ablation(const std::string& s);

// no_image replaces the input projection with a learned constant token;
// no_attention sets the window to 0.
model::ModelConfig apply_ablation(model::ModelConfig config, AblationKind kind);

// Trains a freshly initialized model (seed `model_seed`) on `source` with the
// ablation applied and summarizes stream 0.
Summary run_ablation(AblationKind kind, const model::ModelConfig& config, const streams::TrainerConfig& trainer,
                     std::shared_ptr<const data::ExampleSource> source, std::uint64_t model_seed);

// One update gate per stop position, for separate runs: updates cease once a
// stream-0 chunk would end past the position. Throws std::invalid_argument
// for unsorted or negative positions.
std::vector<streams::UpdateGate> gradient_stop_schedule(std::span<const std::int64_t> positions);

}  // namespace ocltx::eval
