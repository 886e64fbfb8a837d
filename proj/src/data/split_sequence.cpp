#include "ocltx/data/split_sequence.hpp"

#include <numeric>
#include <random>

#include "ocltx/errors.hpp"

namespace ocltx::data {

namespace {

constexpr std::uint64_t kTaskStream = 0x7461736b;     // "task"
constexpr std::uint64_t kExampleStream = 0x6578616d;  // "exam"

}  // namespace

SplitSequence::SplitSequence(std::shared_ptr<const BaseDataset> base, SequenceSpec spec)
    : base_(std::move(base)), spec_(spec) {
    if (!base_) throw ConfigError("data", "missing base dataset");
    if (spec_.num_tasks < 1) throw ConfigError("data.num_tasks", "must be >= 1");
    if (spec_.examples_per_task < 1) throw ConfigError("data.examples_per_task", "must be >= 1");
    if (spec_.ways < 1) throw ConfigError("data.ways", "must be >= 1");
    if (spec_.ways > base_->num_classes) {
        throw ConfigError("data.ways", std::to_string(spec_.ways) + " ways exceed the " +
                                           std::to_string(base_->num_classes) + " base classes");
    }
    base_->validate();

    const std::uint64_t task_seed = mix_seed(spec_.seed, kTaskStream);
    task_classes_.resize(std::size_t(spec_.num_tasks));
    std::vector<int> all(std::size_t(base_->num_classes));
    for (int task = 0; task < spec_.num_tasks; ++task) {
        std::mt19937_64 rng(mix_seed(task_seed, std::uint64_t(task)));
        // Partial Fisher-Yates: the first `ways` entries are a uniform draw of
        // distinct classes.
        std::iota(all.begin(), all.end(), 0);
        for (int i = 0; i < spec_.ways; ++i) {
            std::uniform_int_distribution<int> pick(i, base_->num_classes - 1);
            std::swap(all[std::size_t(i)], all[std::size_t(pick(rng))]);
        }
        std::vector<int> chosen(all.begin(), all.begin() + spec_.ways);
        // Class-to-label bijection.
        for (int i = spec_.ways - 1; i > 0; --i) {
            std::uniform_int_distribution<int> pick(0, i);
            std::swap(chosen[std::size_t(i)], chosen[std::size_t(pick(rng))]);
        }
        task_classes_[std::size_t(task)] = std::move(chosen);
    }
}

SplitSequence::Draw SplitSequence::draw(std::int64_t position) const {
    std::mt19937_64 rng(mix_seed(mix_seed(spec_.seed, kExampleStream), std::uint64_t(position)));
    const int task = int(position / spec_.examples_per_task);
    std::uniform_int_distribution<int> pick_label(0, spec_.ways - 1);
    const int label = pick_label(rng);
    const int cls = task_classes_[std::size_t(task)][std::size_t(label)];
    std::uniform_int_distribution<std::size_t> pick_index(0, base_->pool_size(cls) - 1);
    return {label, pick_index(rng)};
}

AnnotatedExample SplitSequence::at(std::int64_t position) const {
    if (position < 0 || position >= size()) {
        throw DataError("position " + std::to_string(position) + " outside a sequence of " + std::to_string(size()) +
                        " examples");
    }
    const auto d = draw(position);
    const int task = int(position / spec_.examples_per_task);
    const int cls = task_classes_[std::size_t(task)][std::size_t(d.label)];
    auto feats = base_->example(cls, d.pool_index);
    AnnotatedExample out;
    out.example.features.assign(feats.begin(), feats.end());
    out.example.label = d.label;
    out.task_id = task;
    out.within_task_pos = int(position % spec_.examples_per_task);
    return out;
}

int SplitSequence::base_class_at(std::int64_t position) const {
    const int task = int(position / spec_.examples_per_task);
    return task_classes_[std::size_t(task)][std::size_t(draw(position).label)];
}

}  // namespace ocltx::data
