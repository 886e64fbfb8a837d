#include "ocltx/cli/experiment_config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "ocltx/errors.hpp"

namespace ocltx::cli {

namespace {

template <class I>
I parse_integer(const std::string& key, const std::string& value) {
    I out{};
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc() || ptr != value.data() + value.size())
        throw ConfigError(key, "expected an integer, got '" + value + "'");
    return out;
}

double parse_real(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        double v = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::logic_error&) {
        throw ConfigError(key, "expected a number, got '" + value + "'");
    }
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string read_file(const std::filesystem::path& path, const char* what) {
    std::ifstream in(path);
    if (!in) throw ConfigError(what, "cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

template <class F>
void for_each_entry(const std::string& text, F&& f) {
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno), "expected 'key = value', got '" + line + "'");
        auto key = trim(line.substr(0, eq));
        auto value = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError("line " + std::to_string(lineno), "missing key");
        f(key, value);
    }
}

}  // namespace

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

void set_field(ExperimentConfig& c, const std::string& key, const std::string& value) {
    if (model::set_model_field(c.model, key, value)) return;
    auto& t = c.trainer;
    auto& d = c.data;
    if (key == "trainer.num_streams") t.num_streams = parse_integer<int>(key, value);
    else if (key == "trainer.chunk_size") t.chunk_size = parse_integer<int>(key, value);
    else if (key == "trainer.alpha0") t.alpha0 = parse_real(key, value);
    else if (key == "trainer.learning_rate") {
        if (value == "auto") t.learning_rate.reset();
        else t.learning_rate = parse_real(key, value);
    }
    else if (key == "trainer.weight_decay") t.weight_decay = parse_real(key, value);
    else if (key == "trainer.total_examples") t.total_examples = parse_integer<std::int64_t>(key, value);
    else if (key == "trainer.checkpoint_every") t.checkpoint_every = parse_integer<int>(key, value);
    else if (key == "data.source") {
        if (value == "synthetic") d.kind = DataKind::synthetic;
        else if (value == "file") d.kind = DataKind::file;
        else throw ConfigError(key, "expected synthetic or file, got '" + value + "'");
    }
    else if (key == "data.path") d.path = value;
    else if (key == "data.base_classes") d.base_classes = parse_integer<int>(key, value);
    else if (key == "data.feature_dim") d.feature_dim = parse_integer<int>(key, value);
    else if (key == "data.spread") d.spread = parse_real(key, value);
    else if (key == "data.pool_size") d.pool_size = parse_integer<int>(key, value);
    else if (key == "data.num_tasks") d.num_tasks = parse_integer<int>(key, value);
    else if (key == "data.examples_per_task") d.examples_per_task = parse_integer<int>(key, value);
    else if (key == "data.ways") d.ways = parse_integer<int>(key, value);
    else if (key == "run.output_dir") c.output_dir = value;
    else if (key == "run.model_seed") c.model_seed = parse_integer<std::uint64_t>(key, value);
    else if (key == "run.data_seeds") {
        c.data_seeds.clear();
        for (const auto& s : split_list(value)) c.data_seeds.push_back(parse_integer<std::uint64_t>(key, s));
    }
    else if (key == "run.ablation") c.ablation = eval::parse_ablation(value);
    else if (key == "run.gradient_stop") {
        c.gradient_stop.clear();
        for (const auto& s : split_list(value)) c.gradient_stop.push_back(parse_integer<std::int64_t>(key, s));
    }
    else throw ConfigError(key, "unknown key");
}

void ExperimentConfig::validate() const {
    model.validate();
    trainer.validate();
    if (data.kind == DataKind::file) {
        if (data.path.empty()) throw ConfigError("data.path", "required when data.source = file");
    } else {
        auto positive = [](int v, const char* field) {
            if (v < 1) throw ConfigError(field, "must be >= 1, got " + std::to_string(v));
        };
        positive(data.base_classes, "data.base_classes");
        positive(data.feature_dim, "data.feature_dim");
        positive(data.pool_size, "data.pool_size");
        positive(data.num_tasks, "data.num_tasks");
        positive(data.examples_per_task, "data.examples_per_task");
        positive(data.ways, "data.ways");
        if (!std::isfinite(data.spread) || data.spread < 0) throw ConfigError("data.spread", "must be >= 0");
        if (data.ways > data.base_classes)
            throw ConfigError("data.ways", "ways (" + std::to_string(data.ways) + ") exceeds data.base_classes (" +
                                               std::to_string(data.base_classes) + ")");
        if (model.num_classes != data.ways)
            throw ConfigError("model.num_classes", "must equal data.ways (" + std::to_string(data.ways) + ")");
        if (model.feature_dim != data.feature_dim)
            throw ConfigError("model.feature_dim", "must equal data.feature_dim (" +
                                                       std::to_string(data.feature_dim) + ")");
        const std::int64_t size = std::int64_t(data.num_tasks) * data.examples_per_task;
        if (trainer.total_examples > size)
            throw ConfigError("trainer.total_examples", "exceeds the sequence length " + std::to_string(size));
    }
    if (data_seeds.empty()) throw ConfigError("run.data_seeds", "at least one seed is required");
    if (output_dir.empty()) throw ConfigError("run.output_dir", "must not be empty");
    for (std::size_t i = 0; i < gradient_stop.size(); ++i) {
        if (gradient_stop[i] < 0) throw ConfigError("run.gradient_stop", "positions must be >= 0");
        if (i > 0 && gradient_stop[i] < gradient_stop[i - 1])
            throw ConfigError("run.gradient_stop", "positions must be sorted");
    }
}

ExperimentConfig parse_experiment_config(const std::string& text) {
    ExperimentConfig c;
    for_each_entry(text, [&](const std::string& k, const std::string& v) { set_field(c, k, v); });
    return c;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
    return parse_experiment_config(read_file(path, "config"));
}

std::string to_text(const ExperimentConfig& c) {
    std::ostringstream os;
    os << model::to_text(c.model);
    const auto& t = c.trainer;
    os << "trainer.num_streams = " << t.num_streams << '\n'
       << "trainer.chunk_size = " << t.chunk_size << '\n'
       << "trainer.alpha0 = " << fmt(t.alpha0) << '\n'
       << "trainer.learning_rate = " << (t.learning_rate ? fmt(*t.learning_rate) : std::string("auto")) << '\n'
       << "trainer.weight_decay = " << fmt(t.weight_decay) << '\n'
       << "trainer.total_examples = " << t.total_examples << '\n'
       << "trainer.checkpoint_every = " << t.checkpoint_every << '\n';
    const auto& d = c.data;
    os << "data.source = " << (d.kind == DataKind::file ? "file" : "synthetic") << '\n';
    if (d.kind == DataKind::file) os << "data.path = " << d.path.string() << '\n';
    os << "data.base_classes = " << d.base_classes << '\n'
       << "data.feature_dim = " << d.feature_dim << '\n'
       << "data.spread = " << fmt(d.spread) << '\n'
       << "data.pool_size = " << d.pool_size << '\n'
       << "data.num_tasks = " << d.num_tasks << '\n'
       << "data.examples_per_task = " << d.examples_per_task << '\n'
       << "data.ways = " << d.ways << '\n';
    os << "run.output_dir = " << c.output_dir.string() << '\n' << "run.data_seeds = ";
    for (std::size_t i = 0; i < c.data_seeds.size(); ++i) os << (i ? ", " : "") << c.data_seeds[i];
    os << '\n' << "run.model_seed = " << c.model_seed << '\n' << "run.ablation = " << eval::to_string(c.ablation) << '\n';
    if (!c.gradient_stop.empty()) {
        os << "run.gradient_stop = ";
        for (std::size_t i = 0; i < c.gradient_stop.size(); ++i) os << (i ? ", " : "") << c.gradient_stop[i];
        os << '\n';
    }
    return os.str();
}

Grid parse_grid(const std::string& text) {
    Grid grid;
    for_each_entry(text, [&](const std::string& k, const std::string& v) {
        auto values = split_list(v);
        if (values.empty()) throw ConfigError(k, "grid entry has no values");
        for (const auto& [existing, _] : grid)
            if (existing == k) throw ConfigError(k, "listed twice in the grid");
        // Reject unknown keys up front.
        ExperimentConfig probe;
        for (const auto& value : values) set_field(probe, k, value);
        grid.emplace_back(k, std::move(values));
    });
    return grid;
}

Grid load_grid(const std::filesystem::path& path) { return parse_grid(read_file(path, "grid")); }

std::vector<std::vector<std::pair<std::string, std::string>>> expand_grid(const Grid& grid) {
    std::vector<std::vector<std::pair<std::string, std::string>>> points{{}};
    for (const auto& [key, values] : grid) {
        std::vector<std::vector<std::pair<std::string, std::string>>> next;
        for (const auto& p : points) {
            for (const auto& v : values) {
                auto q = p;
                q.emplace_back(key, v);
                next.push_back(std::move(q));
            }
        }
        points = std::move(next);
    }
    return points;
}

}  // namespace ocltx::cli
