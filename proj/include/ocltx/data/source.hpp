#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "ocltx/model/example.hpp"

namespace ocltx::data {

struct AnnotatedExample {
    model::Example example;
    int task_id = 0;
    int within_task_pos = 0;
};

// Random-access, deterministic example sequence. at(p) is a pure function of
// the source and p, which is what lets replay streams restart a reader
// instead of buffering examples.
class ExampleSource {
public:
    virtual ~ExampleSource() = default;
    virtual std::int64_t size() const = 0;
    virtual int num_classes() const = 0;
    virtual int feature_dim() const = 0;
    // Throws DataError for positions outside [0, size()).
    virtual AnnotatedExample at(std::int64_t position) const = 0;
};

class InMemorySource : public ExampleSource {
public:
    InMemorySource(std::vector<AnnotatedExample> examples, int num_classes, int feature_dim);

    std::int64_t size() const override { return std::int64_t(examples_.size()); }
    int num_classes() const override { return num_classes_; }
    int feature_dim() const override { return feature_dim_; }
    AnnotatedExample at(std::int64_t position) const override;

private:
    std::vector<AnnotatedExample> examples_;
    int num_classes_;
    int feature_dim_;
};

// Sequential cursor over a source.
class Reader {
public:
    explicit Reader(std::shared_ptr<const ExampleSource> source);

    std::int64_t position() const noexcept { return position_; }
    bool exhausted() const { return position_ >= source_->size(); }
    const ExampleSource& source() const { return *source_; }

    // Throws DataError when exhausted.
    AnnotatedExample next();
    std::optional<AnnotatedExample> try_next();
    // Up to `count` examples; fewer only at the end of the source.
    std::vector<AnnotatedExample> next_chunk(std::size_t count);
    void reset() { position_ = 0; }

private:
    std::shared_ptr<const ExampleSource> source_;
    std::int64_t position_ = 0;
};

// SplitMix64 finalizer; used to derive independent seeds from (seed, index).
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index);

}  // namespace ocltx::data
