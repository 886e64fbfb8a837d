#include "ocltx/streams/trainer.hpp"

#include <algorithm>
#include <cmath>

#include "ocltx/errors.hpp"
#include "ocltx/eval/macs.hpp"
#include "ocltx/model/checkpoint.hpp"
#include "ocltx/model/transformer.hpp"
#include "ocltx/numerics/ops.hpp"

namespace ocltx::streams {

void TrainerConfig::validate() const {
    if (num_streams < 1) throw ConfigError("trainer.num_streams", "must be >= 1");
    if (chunk_size < 1) throw ConfigError("trainer.chunk_size", "must be >= 1");
    if (!std::isfinite(alpha0) || alpha0 <= 0) throw ConfigError("trainer.alpha0", "must be positive");
    if (learning_rate && (!std::isfinite(*learning_rate) || *learning_rate <= 0))
        throw ConfigError("trainer.learning_rate", "must be positive");
    if (!std::isfinite(weight_decay) || weight_decay < 0) throw ConfigError("trainer.weight_decay", "must be >= 0");
    if (total_examples < 0) throw ConfigError("trainer.total_examples", "must be >= 0");
    if (checkpoint_every < 0) throw ConfigError("trainer.checkpoint_every", "must be >= 0");
    if (checkpoint_every > 0 && checkpoint_path.empty())
        throw ConfigError("trainer.checkpoint_path", "required when trainer.checkpoint_every > 0");
}

template <class T>
StreamState<T>::StreamState(int idx, std::shared_ptr<const data::ExampleSource> source,
                            const model::ModelConfig& config, std::uint64_t seed)
    : index(idx),
      reader(std::move(source)),
      caches(model::make_caches<T>(config)),
      rng(data::mix_seed(seed, std::uint64_t(idx))) {}

template <class T>
StepResult gradient_step(const model::ModelConfig& config, model::ModelParams<T>& params,
                         std::span<num::Tensor<T>> param_list, num::AdamWState<T>& optimizer,
                         StreamState<T>& stream, std::span<const data::AnnotatedExample> chunk, bool apply_update) {
    if (chunk.empty()) throw DimensionError("gradient_step: empty chunk");
    const std::int64_t first = stream.reader.position() - std::int64_t(chunk.size());
    const std::int64_t first_token = first * config.tokens_per_example();
    if (first < 0 || stream.caches.total_tokens_seen() != first_token) {
        throw StateError("gradient_step: stream " + std::to_string(stream.index) + " caches have seen " +
                         std::to_string(stream.caches.total_tokens_seen()) + " tokens but the chunk starts at example " +
                         std::to_string(first));
    }

    std::vector<model::Example> examples;
    std::vector<int> labels;
    examples.reserve(chunk.size());
    labels.reserve(chunk.size());
    for (const auto& a : chunk) {
        examples.push_back(a.example);
        labels.push_back(a.example.label);
    }

    num::zero_grads(param_list);
    if (!apply_update)
        for (auto& p : param_list) p.set_requires_grad(false);
    auto logits = model::forward_chunk(config, params, std::span<const model::Example>(examples), stream.caches);
    if (!apply_update)
        for (auto& p : param_list) p.set_requires_grad(true);

    auto nll = num::cross_entropy(logits, std::span<const int>(labels));
    auto loss = num::mean(nll);

    StepResult result;
    result.mean_nll = double(loss.item());
    if (!std::isfinite(result.mean_nll)) {
        throw NonFiniteError("non-finite loss on stream " + std::to_string(stream.index) + " at position " +
                                 std::to_string(first),
                             optimizer.step_count, stream.index, first);
    }

    const std::size_t k = config.num_classes;
    auto lv = logits.values();
    auto nv = nll.values();
    result.records.reserve(chunk.size());
    for (std::size_t i = 0; i < chunk.size(); ++i) {
        eval::MetricRecord r;
        r.position = first + std::int64_t(i);
        r.nll = double(nv[i]);
        r.correct = num::argmax<T>(lv.subspan(i * k, k)) == std::size_t(labels[i]);
        r.task_id = chunk[i].task_id;
        r.within_task_pos = chunk[i].within_task_pos;
        result.records.push_back(r);
    }

    const auto fwd = eval::macs_forward(config, std::int64_t(chunk.size()), first);
    result.macs = apply_update ? eval::training_macs(fwd) : fwd;
    if (apply_update) {
        loss.backward();
        try {
            num::adamw_step(param_list, optimizer);
        } catch (const NonFiniteError& e) {
            throw NonFiniteError(std::string(e.what()) + " (stream " + std::to_string(stream.index) + ", position " +
                                     std::to_string(first) + ")",
                                 e.step(), stream.index, first);
        }
        result.updated = true;
    }
    return result;
}

double reset_probability(std::int64_t lead_position, int chunk_size) {
    if (lead_position <= 0) return 1.0;
    return std::min(1.0, double(chunk_size) / double(lead_position));
}

template <class T>
bool maybe_reset(StreamState<T>& stream, std::int64_t lead_position, int chunk_size) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double draw = u(stream.rng);
    if (draw >= reset_probability(lead_position, chunk_size)) return false;
    stream.reader.reset();
    stream.caches.clear();
    return true;
}

template <class T>
TrainResult train_sequence(const model::ModelConfig& config, model::ModelParams<T>& params,
                           std::shared_ptr<const data::ExampleSource> source, const TrainerConfig& trainer) {
    config.validate();
    trainer.validate();
    if (source->num_classes() != config.num_classes)
        throw ConfigError("model.num_classes", "data has " + std::to_string(source->num_classes()) +
                                                   " classes but the model predicts " +
                                                   std::to_string(config.num_classes));
    if (config.use_features && source->feature_dim() != config.feature_dim)
        throw ConfigError("model.feature_dim", "data has " + std::to_string(source->feature_dim()) +
                                                   " features but the model expects " +
                                                   std::to_string(config.feature_dim));
    const std::int64_t total = trainer.total_examples > 0 ? trainer.total_examples : source->size();
    if (total > source->size())
        throw DataError("data source holds " + std::to_string(source->size()) + " examples, fewer than the " +
                        std::to_string(total) + " requested");

    auto param_list = params.list();
    num::AdamWConfig opt_cfg;
    opt_cfg.learning_rate = trainer.effective_learning_rate(config.width);
    opt_cfg.weight_decay = trainer.weight_decay;
    // Layer-norm scales and offsets are not decayed.
    std::vector<bool> decay_mask;
    for (const auto& p : param_list) decay_mask.push_back(p.rank() >= 2);
    num::AdamWState<T> optimizer(opt_cfg, std::span<const num::Tensor<T>>(param_list), std::move(decay_mask));

    std::vector<StreamState<T>> streams;
    streams.reserve(trainer.num_streams);
    for (int s = 0; s < trainer.num_streams; ++s) streams.emplace_back(s, source, config, trainer.seed);

    TrainResult result;
    result.log.records.reserve(std::size_t(total));
    const int S = trainer.chunk_size;
    std::int64_t turn = 0;
    auto& lead = streams[0];
    while (lead.reader.position() < total) {
        const std::int64_t start = lead.reader.position();
        const auto chunk = lead.reader.next_chunk(std::size_t(std::min<std::int64_t>(S, total - start)));
        const std::int64_t end = lead.reader.position();
        const bool update = !trainer.update_gate || trainer.update_gate(end);

        auto step = gradient_step(config, params, std::span<num::Tensor<T>>(param_list), optimizer, lead,
                                  std::span<const data::AnnotatedExample>(chunk), update);
        result.log.records.insert(result.log.records.end(), step.records.begin(), step.records.end());
        result.macs_total += step.macs;
        ++result.stream0_steps;
        if (step.updated) ++result.gradient_steps;

        if (update) {
            for (int s = 1; s < trainer.num_streams; ++s) {
                auto& replay = streams[s];
                maybe_reset(replay, start, S);
                const std::int64_t q = replay.reader.position();
                const auto len = std::min<std::int64_t>(S, end - q);
                if (len <= 0) continue;
                const auto rchunk = replay.reader.next_chunk(std::size_t(len));
                auto rstep = gradient_step(config, params, std::span<num::Tensor<T>>(param_list), optimizer, replay,
                                           std::span<const data::AnnotatedExample>(rchunk), true);
                result.macs_total += rstep.macs;
                ++result.replay_steps;
                ++result.gradient_steps;
            }
        }

        ++turn;
        if (trainer.checkpoint_every > 0 && turn % trainer.checkpoint_every == 0)
            model::save_checkpoint(trainer.checkpoint_path, config, params);
    }
    if (!trainer.checkpoint_path.empty()) model::save_checkpoint(trainer.checkpoint_path, config, params);
    return result;
}

#define OCLTX_INSTANTIATE(T)                                                                                        \
    template struct StreamState<T>;                                                                                 \
    template StepResult gradient_step(const model::ModelConfig&, model::ModelParams<T>&, std::span<num::Tensor<T>>, \
                                      num::AdamWState<T>&, StreamState<T>&,                                         \
                                      std::span<const data::AnnotatedExample>, bool);                               \
    template bool maybe_reset(StreamState<T>&, std::int64_t, int);                                                  \
    template TrainResult train_sequence(const model::ModelConfig&, model::ModelParams<T>&,                          \
                                        std::shared_ptr<const data::ExampleSource>, const TrainerConfig&);

OCLTX_INSTANTIATE(float)
OCLTX_INSTANTIATE(double)

#undef OCLTX_INSTANTIATE

}  // namespace ocltx::streams
