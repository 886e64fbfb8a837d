#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "ocltx/data/source.hpp"

namespace ocltx::data {

// OCLF feature file, all integers and floats little-endian:
//
//   offset 0   "OCLF"          magic
//   offset 4   u32 version     = 1
//   offset 8   u32 K           number of classes
//   offset 12  u32 F           feature dimension
//   offset 16  u64 T           number of records
//   offset 24  T records of [u32 label][F x f32]
class FeatureFileSource : public ExampleSource {
public:
    FeatureFileSource(int num_classes, int feature_dim, std::vector<model::Example> examples);

    std::int64_t size() const override { return std::int64_t(examples_.size()); }
    int num_classes() const override { return num_classes_; }
    int feature_dim() const override { return feature_dim_; }
    AnnotatedExample at(std::int64_t position) const override;

    const std::vector<model::Example>& examples() const { return examples_; }

private:
    int num_classes_;
    int feature_dim_;
    std::vector<model::Example> examples_;
};

// Throws FormatError (with byte offset) on bad magic, unsupported version,
// truncation, trailing bytes or labels >= K.
std::shared_ptr<FeatureFileSource> load_feature_file(const std::filesystem::path& path);

void write_feature_file(const std::filesystem::path& path, int num_classes, int feature_dim,
                        std::span<const model::Example> examples);

// Converts "label,f1,...,fF" lines to OCLF. K defaults to max label + 1.
// Returns the number of records written.
std::size_t convert_csv_to_feature_file(const std::filesystem::path& csv_path, const std::filesystem::path& out_path,
                                        std::optional<int> num_classes = std::nullopt);

// True if the file starts with the OCLF magic.
bool is_feature_file(const std::filesystem::path& path);

}  // namespace ocltx::data
