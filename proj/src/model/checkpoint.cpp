#include "ocltx/model/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "ocltx/errors.hpp"

namespace ocltx::model {

namespace {

constexpr const char* kMagicLine = "OCLTX-CHECKPOINT 1";

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

void put_f32(std::ostream& os, float v) {
    auto bits = std::bit_cast<std::uint32_t>(v);
    unsigned char b[4] = {static_cast<unsigned char>(bits), static_cast<unsigned char>(bits >> 8),
                          static_cast<unsigned char>(bits >> 16), static_cast<unsigned char>(bits >> 24)};
    os.write(reinterpret_cast<const char*>(b), 4);
}

}  // namespace

template <class T>
void save_checkpoint(const std::filesystem::path& path, const ModelConfig& config, const ModelParams<T>& params) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream os(path, std::ios::binary);
    if (!os) throw DataError("cannot open checkpoint for writing: " + path.string());
    auto tensors = params.list();
    os << kMagicLine << '\n' << to_text(config);
    os << "tensors = " << tensors.size() << '\n' << "floats = " << params.count() << '\n' << "end\n";
    for (const auto& t : tensors)
        for (auto v : t.values()) put_f32(os, float(v));
    if (!os) throw DataError("failed writing checkpoint: " + path.string());
}

template <class T>
ModelParams<T> load_checkpoint(const std::filesystem::path& path, ModelConfig* config_out) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("cannot open checkpoint: " + path.string());

    std::string line;
    std::uint64_t offset = 0;
    auto next_line = [&]() {
        if (!std::getline(is, line)) throw FormatError("truncated checkpoint header", offset);
        offset += line.size() + 1;
    };
    next_line();
    if (trim(line) != kMagicLine) throw FormatError("not a checkpoint (bad magic line)", 0);

    ModelConfig config;
    std::size_t tensors = 0, floats = 0;
    while (true) {
        const std::uint64_t line_start = offset;
        next_line();
        auto text = trim(line);
        if (text == "end") break;
        auto eq = text.find('=');
        if (eq == std::string::npos) throw FormatError("malformed header line '" + text + "'", line_start);
        auto key = trim(text.substr(0, eq)), value = trim(text.substr(eq + 1));
        try {
            if (key == "tensors") tensors = std::stoull(value);
            else if (key == "floats") floats = std::stoull(value);
            else if (!set_model_field(config, key, value)) throw ConfigError(key, "unknown key");
        } catch (const std::logic_error&) {
            throw FormatError("bad header entry '" + text + "'", line_start);
        } catch (const ConfigError& e) {
            throw FormatError(std::string("bad header entry: ") + e.what(), line_start);
        }
    }

    auto params = init_params<T>(config, 0);
    auto list = params.list();
    if (list.size() != tensors || params.count() != floats) {
        throw FormatError("header declares " + std::to_string(tensors) + " tensors / " + std::to_string(floats) +
                              " floats but the configuration implies " + std::to_string(list.size()) + " / " +
                              std::to_string(params.count()),
                          offset);
    }
    for (auto& t : list) {
        auto values = t.mutable_values();
        for (auto& v : values) {
            unsigned char b[4];
            if (!is.read(reinterpret_cast<char*>(b), 4)) throw FormatError("truncated weight data", offset);
            offset += 4;
            std::uint32_t bits = std::uint32_t(b[0]) | std::uint32_t(b[1]) << 8 | std::uint32_t(b[2]) << 16 |
                                 std::uint32_t(b[3]) << 24;
            v = T(std::bit_cast<float>(bits));
        }
    }
    if (is.peek() != std::char_traits<char>::eof()) throw FormatError("trailing bytes after weight data", offset);
    if (config_out) *config_out = config;
    return params;
}

template void save_checkpoint(const std::filesystem::path&, const ModelConfig&, const ModelParams<float>&);
template void save_checkpoint(const std::filesystem::path&, const ModelConfig&, const ModelParams<double>&);
template ModelParams<float> load_checkpoint(const std::filesystem::path&, ModelConfig*);
template ModelParams<double> load_checkpoint(const std::filesystem::path&, ModelConfig*);

}  // namespace ocltx::model
