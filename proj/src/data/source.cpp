#include "ocltx/data/source.hpp"

#include "ocltx/errors.hpp"

namespace ocltx::data {

InMemorySource::InMemorySource(std::vector<AnnotatedExample> examples, int num_classes, int feature_dim)
    : examples_(std::move(examples)), num_classes_(num_classes), feature_dim_(feature_dim) {
    for (std::size_t i = 0; i < examples_.size(); ++i) {
        const auto& e = examples_[i].example;
        if (e.label < 0 || e.label >= num_classes_) {
            throw DataError("example " + std::to_string(i) + " has label " + std::to_string(e.label) +
                            " outside [0, " + std::to_string(num_classes_) + ")");
        }
        if (int(e.features.size()) != feature_dim_) {
            throw DataError("example " + std::to_string(i) + " has " + std::to_string(e.features.size()) +
                            " features, expected " + std::to_string(feature_dim_));
        }
    }
}

AnnotatedExample InMemorySource::at(std::int64_t position) const {
    if (position < 0 || position >= size()) {
        throw DataError("position " + std::to_string(position) + " outside a source of " + std::to_string(size()) +
                        " examples");
    }
    return examples_[std::size_t(position)];
}

Reader::Reader(std::shared_ptr<const ExampleSource> source) : source_(std::move(source)) {
    if (!source_) throw DataError("reader constructed without a source");
}

AnnotatedExample Reader::next() {
    if (exhausted()) throw DataError("reader exhausted after " + std::to_string(position_) + " examples");
    return source_->at(position_++);
}

std::optional<AnnotatedExample> Reader::try_next() {
    if (exhausted()) return std::nullopt;
    return source_->at(position_++);
}

std::vector<AnnotatedExample> Reader::next_chunk(std::size_t count) {
    std::vector<AnnotatedExample> out;
    out.reserve(count);
    while (out.size() < count && !exhausted()) out.push_back(source_->at(position_++));
    return out;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace ocltx::data
