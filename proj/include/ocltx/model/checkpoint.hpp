#pragma once

#include <filesystem>

#include "ocltx/model/config.hpp"
#include "ocltx/model/params.hpp"

namespace ocltx::model {

// Checkpoint layout:
//
//   OCLTX-CHECKPOINT 1\n
//   model.variant = pi\n          one line per ModelConfig field (see to_text)
//   ...
//   tensors = <count>\n
//   floats = <count>\n
//   end\n
//   <floats x f32, little-endian>  parameters in ModelParams::list() order
//
// Weights are stored in single precision regardless of T.
template <class T>
void save_checkpoint(const std::filesystem::path& path, const ModelConfig& config, const ModelParams<T>& params);

template <class T>
ModelParams<T> load_checkpoint(const std::filesystem::path& path, ModelConfig* config_out = nullptr);

}  // namespace ocltx::model
