#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "ocltx/data/gaussian_blobs.hpp"
#include "ocltx/data/source.hpp"

namespace ocltx::data {

struct SequenceSpec {
    int num_tasks = 100;
    int examples_per_task = 500;
    int ways = 10;
    std::uint64_t seed = 0;
};

// Piecewise-stationary sequence: every task draws `ways` distinct base
// classes, maps them to observed labels 0..ways-1 by a seeded Fisher-Yates
// permutation, and then samples examples uniformly (with replacement) from
// the selected classes. Classes may recur across tasks.
class SplitSequence : public ExampleSource {
public:
    // Throws ConfigError("data.ways") if ways exceeds the base classes.
    SplitSequence(std::shared_ptr<const BaseDataset> base, SequenceSpec spec);

    std::int64_t size() const override { return std::int64_t(spec_.num_tasks) * spec_.examples_per_task; }
    int num_classes() const override { return spec_.ways; }
    int feature_dim() const override { return base_->feature_dim; }
    AnnotatedExample at(std::int64_t position) const override;

    // Base class shown under observed label `label` during `task`.
    int base_class(int task, int label) const { return task_classes_[std::size_t(task)][std::size_t(label)]; }
    // Base class of the example at `position`.
    int base_class_at(std::int64_t position) const;
    const SequenceSpec& spec() const { return spec_; }

private:
    struct Draw {
        int label;
        std::size_t pool_index;
    };
    Draw draw(std::int64_t position) const;

    std::shared_ptr<const BaseDataset> base_;
    SequenceSpec spec_;
    std::vector<std::vector<int>> task_classes_;
};

}  // namespace ocltx::data
