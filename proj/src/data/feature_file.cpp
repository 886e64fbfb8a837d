#include "ocltx/data/feature_file.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "ocltx/errors.hpp"

namespace ocltx::data {

namespace {

constexpr char kMagic[4] = {'O', 'C', 'L', 'F'};
constexpr std::uint32_t kVersion = 1;
constexpr std::size_t kHeaderBytes = 24;

template <class U>
void put_le(std::ostream& os, U v) {
    unsigned char b[sizeof(U)];
    for (std::size_t i = 0; i < sizeof(U); ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    os.write(reinterpret_cast<const char*>(b), sizeof(U));
}

template <class U>
U get_le(const unsigned char* p) {
    U v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) v |= U(p[i]) << (8 * i);
    return v;
}

}  // namespace

FeatureFileSource::FeatureFileSource(int num_classes, int feature_dim, std::vector<model::Example> examples)
    : num_classes_(num_classes), feature_dim_(feature_dim), examples_(std::move(examples)) {}

AnnotatedExample FeatureFileSource::at(std::int64_t position) const {
    if (position < 0 || position >= size()) {
        throw DataError("position " + std::to_string(position) + " outside a feature file of " +
                        std::to_string(size()) + " records");
    }
    AnnotatedExample out;
    out.example = examples_[std::size_t(position)];
    out.task_id = 0;
    out.within_task_pos = int(position);
    return out;
}

std::shared_ptr<FeatureFileSource> load_feature_file(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("cannot open feature file: " + path.string());
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());

    if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) throw FormatError("bad magic, expected OCLF", 0);
    if (bytes.size() < kHeaderBytes) throw FormatError("truncated header", bytes.size());
    const auto version = get_le<std::uint32_t>(bytes.data() + 4);
    if (version != kVersion) throw FormatError("unsupported version " + std::to_string(version), 4);
    const auto k = get_le<std::uint32_t>(bytes.data() + 8);
    const auto f = get_le<std::uint32_t>(bytes.data() + 12);
    const auto t = get_le<std::uint64_t>(bytes.data() + 16);
    if (k == 0) throw FormatError("K must be >= 1", 8);
    if (f == 0) throw FormatError("F must be >= 1", 12);

    const std::uint64_t record = 4 + 4 * std::uint64_t(f);
    std::vector<model::Example> examples;
    std::uint64_t offset = kHeaderBytes;
    for (std::uint64_t r = 0; r < t; ++r) {
        if (bytes.size() < offset + record) {
            throw FormatError("truncated record " + std::to_string(r) + " of " + std::to_string(t), offset);
        }
        const auto label = get_le<std::uint32_t>(bytes.data() + offset);
        if (label >= k) {
            throw FormatError("record " + std::to_string(r) + " has label " + std::to_string(label) + " >= K=" +
                                  std::to_string(k),
                              offset);
        }
        model::Example ex;
        ex.label = int(label);
        ex.features.resize(f);
        for (std::uint32_t j = 0; j < f; ++j) {
            ex.features[j] = std::bit_cast<float>(get_le<std::uint32_t>(bytes.data() + offset + 4 + 4 * j));
        }
        examples.push_back(std::move(ex));
        offset += record;
    }
    if (offset != bytes.size()) throw FormatError("trailing bytes after the last record", offset);
    return std::make_shared<FeatureFileSource>(int(k), int(f), std::move(examples));
}

void write_feature_file(const std::filesystem::path& path, int num_classes, int feature_dim,
                        std::span<const model::Example> examples) {
    if (num_classes < 1 || feature_dim < 1) throw ConfigError("data", "K and F must be >= 1");
    std::ofstream os(path, std::ios::binary);
    if (!os) throw DataError("cannot open feature file for writing: " + path.string());
    os.write(kMagic, 4);
    put_le<std::uint32_t>(os, kVersion);
    put_le<std::uint32_t>(os, std::uint32_t(num_classes));
    put_le<std::uint32_t>(os, std::uint32_t(feature_dim));
    put_le<std::uint64_t>(os, examples.size());
    for (const auto& ex : examples) {
        if (ex.label < 0 || ex.label >= num_classes || int(ex.features.size()) != feature_dim) {
            throw DataError("example with label " + std::to_string(ex.label) + " and " +
                            std::to_string(ex.features.size()) + " features does not fit K=" +
                            std::to_string(num_classes) + ", F=" + std::to_string(feature_dim));
        }
        put_le<std::uint32_t>(os, std::uint32_t(ex.label));
        for (float v : ex.features) put_le<std::uint32_t>(os, std::bit_cast<std::uint32_t>(v));
    }
    if (!os) throw DataError("failed writing feature file: " + path.string());
}

std::size_t convert_csv_to_feature_file(const std::filesystem::path& csv_path, const std::filesystem::path& out_path,
                                        std::optional<int> num_classes) {
    std::ifstream is(csv_path);
    if (!is) throw DataError("cannot open CSV file: " + csv_path.string());
    std::vector<model::Example> examples;
    std::string line;
    std::size_t line_no = 0;
    int feature_dim = -1, max_label = -1;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        std::stringstream ss(line);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        model::Example ex;
        try {
            ex.label = std::stoi(cells.at(0));
            for (std::size_t j = 1; j < cells.size(); ++j) ex.features.push_back(std::stof(cells[j]));
        } catch (const std::exception&) {
            // Allow one header row.
            if (line_no == 1) continue;
            throw DataError("CSV line " + std::to_string(line_no) + " is not 'label,f1,...,fF'");
        }
        if (ex.label < 0) throw DataError("CSV line " + std::to_string(line_no) + " has a negative label");
        if (feature_dim < 0) feature_dim = int(ex.features.size());
        if (int(ex.features.size()) != feature_dim || feature_dim == 0) {
            throw DataError("CSV line " + std::to_string(line_no) + " has " + std::to_string(ex.features.size()) +
                            " features, expected " + std::to_string(feature_dim));
        }
        max_label = std::max(max_label, ex.label);
        examples.push_back(std::move(ex));
    }
    if (examples.empty()) throw DataError("CSV file holds no records: " + csv_path.string());
    const int k = num_classes.value_or(max_label + 1);
    if (max_label >= k) {
        throw DataError("CSV label " + std::to_string(max_label) + " exceeds K=" + std::to_string(k));
    }
    write_feature_file(out_path, k, feature_dim, examples);
    return examples.size();
}

bool is_feature_file(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    char magic[4] = {};
    return is.read(magic, 4) && std::memcmp(magic, kMagic, 4) == 0;
}

}  // namespace ocltx::data
