#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "ocltx/data/source.hpp"
#include "ocltx/eval/metrics.hpp"
#include "ocltx/model/config.hpp"
#include "ocltx/model/kv_cache.hpp"
#include "ocltx/model/params.hpp"
#include "ocltx/numerics/adamw.hpp"

namespace ocltx::streams {

// Returns whether the stream-0 chunk ending (exclusively) at the given
// position may update the parameters. An empty gate always allows updates.
using UpdateGate = std::function<bool(std::int64_t chunk_end)>;

struct TrainerConfig {
    int num_streams = 1;                 // E; 1 disables replay
    int chunk_size = 50;                 // S
    double alpha0 = 3e-2;
    std::optional<double> learning_rate; // defaults to alpha0 / D
    double weight_decay = 0.0;
    std::uint64_t seed = 0;              // stream reset randomness
    std::int64_t total_examples = 0;     // T; 0 means the whole source
    UpdateGate update_gate;
    int checkpoint_every = 0;            // turns; 0 disables periodic checkpoints
    std::filesystem::path checkpoint_path;

    double effective_learning_rate(int width) const {
        return learning_rate ? *learning_rate : alpha0 / double(width);
    }
    // Throws ConfigError naming the first invalid "trainer.*" field.
    void validate() const;
};

template <class T>
struct StreamState {
    int index = 0;
    data::Reader reader;
    model::CacheSet<T> caches;
    std::mt19937_64 rng;

    StreamState(int index, std::shared_ptr<const data::ExampleSource> source, const model::ModelConfig& config,
                 std::uint64_t seed);
};

struct StepResult {
    double mean_nll = 0.0;
    std::vector<eval::MetricRecord> records;
    bool updated = false;
    std::uint64_t macs = 0;  // analytic: 3x forward when updated, else 1x
};

// Forward pass on `chunk` (which must be the next examples of `stream`), per
// example NLL and argmax correctness, then one AdamW step on the mean loss if
// `apply_update`. Throws NonFiniteError with the stream index and position.
template <class T>
StepResult gradient_step(const model::ModelConfig& config, model::ModelParams<T>& params,
                         std::span<num::Tensor<T>> param_list, num::AdamWState<T>& optimizer,
                         StreamState<T>& stream, std::span<const data::AnnotatedExample> chunk, bool apply_update);

// min(1, S / t); 1 when t is 0.
double reset_probability(std::int64_t lead_position, int chunk_size);

// Resets a replay stream (reader to 0, caches cleared) with
// reset_probability(lead_position, chunk_size). Always consumes exactly one
// draw from the stream's generator. Returns whether it reset.
template <class T>
bool maybe_reset(StreamState<T>& stream, std::int64_t lead_position, int chunk_size);

struct TrainResult {
    eval::MetricsLog log;             // stream 0, positions 0..T-1
    std::int64_t gradient_steps = 0;  // updates applied, all streams
    std::int64_t stream0_steps = 0;
    std::int64_t replay_steps = 0;
    std::uint64_t macs_total = 0;
};

// Replay-streams online training. Each turn advances stream 0 by one chunk
// (recording its predictions), then each replay stream in index order: a
// possible reset, then one step on a chunk that never passes stream 0.
// Replay is skipped while the update gate is closed.
template <class T>
TrainResult train_sequence(const model::ModelConfig& config, model::ModelParams<T>& params,
                           std::shared_ptr<const data::ExampleSource> source, const TrainerConfig& trainer);

}  // namespace ocltx::streams
