#include "ocltx/eval/metrics.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "ocltx/errors.hpp"

namespace ocltx::eval {

namespace {

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<GroupStat> group_by(const MetricsLog& log, bool by_task) {
    std::map<int, GroupStat> groups;
    for (const auto& r : log.records) {
        int key = by_task ? r.task_id : r.within_task_pos;
        auto& g = groups[key];
        g.key = key;
        ++g.count;
        g.mean_accuracy += r.correct ? 1.0 : 0.0;
        g.mean_nll += r.nll;
    }
    std::vector<GroupStat> out;
    out.reserve(groups.size());
    for (auto& [key, g] : groups) {
        g.mean_accuracy /= double(g.count);
        g.mean_nll /= double(g.count);
        out.push_back(g);
    }
    return out;
}

std::ofstream open_out(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw DataError("cannot open " + path.string() + " for writing");
    return out;
}

}  // namespace

void MetricsLog::validate() const {
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        if (r.position != std::int64_t(i)) {
            throw StateError("metrics log: entry " + std::to_string(i) + " has position " +
                             std::to_string(r.position) + "; positions must be 0.." +
                             std::to_string(records.size() - 1) + " in order");
        }
        if (!std::isfinite(r.nll) || r.nll < 0) {
            throw StateError("metrics log: invalid nll " + fmt(r.nll) + " at position " + std::to_string(i));
        }
    }
}

void MetricsLog::append(const MetricsLog& other) {
    const auto base = std::int64_t(records.size());
    for (auto r : other.records) {
        r.position += base;
        records.push_back(r);
    }
}

double Summary::task_range_accuracy(int first, int last) const {
    double total = 0;
    int n = 0;
    for (const auto& g : per_task) {
        if (g.key >= first && g.key <= last) {
            total += g.mean_accuracy;
            ++n;
        }
    }
    if (n == 0) {
        throw StateError("task_range_accuracy: no tasks in [" + std::to_string(first) + ", " + std::to_string(last) +
                         "]");
    }
    return total / n;
}

Summary summarize(const MetricsLog& log) {
    if (log.records.empty()) throw StateError("summarize: empty metrics log");
    log.validate();
    Summary s;
    s.examples = std::int64_t(log.size());
    s.running_accuracy.reserve(log.size());
    double correct = 0;
    for (const auto& r : log.records) {
        s.cumulative_nll += r.nll;
        correct += r.correct ? 1.0 : 0.0;
        s.running_accuracy.push_back(correct / double(s.running_accuracy.size() + 1));
    }
    s.mean_nll = s.cumulative_nll / double(s.examples);
    s.average_accuracy = correct / double(s.examples);
    s.per_task = group_by(log, true);
    s.within_task = group_by(log, false);
    return s;
}

std::string to_string(CurveKind kind) {
    switch (kind) {
        case CurveKind::running_accuracy: return "running_accuracy";
        case CurveKind::per_task_accuracy: return "per_task_accuracy";
        case CurveKind::per_task_nll: return "per_task_nll";
        case CurveKind::within_task_accuracy: return "within_task_accuracy";
        case CurveKind::within_task_nll: return "within_task_nll";
    }
    return "unknown";
}

Curve aggregate(std::span<const Summary> runs, CurveKind kind) {
    if (runs.empty()) throw StateError("aggregate: no runs");
    // x -> per-run values
    std::map<double, std::vector<double>> points;
    for (const auto& run : runs) {
        switch (kind) {
            case CurveKind::running_accuracy:
                for (std::size_t i = 0; i < run.running_accuracy.size(); ++i)
                    points[double(i)].push_back(run.running_accuracy[i]);
                break;
            case CurveKind::per_task_accuracy:
            case CurveKind::per_task_nll:
                for (const auto& g : run.per_task)
                    points[g.key].push_back(kind == CurveKind::per_task_nll ? g.mean_nll : g.mean_accuracy);
                break;
            case CurveKind::within_task_accuracy:
            case CurveKind::within_task_nll:
                for (const auto& g : run.within_task)
                    points[g.key].push_back(kind == CurveKind::within_task_nll ? g.mean_nll : g.mean_accuracy);
                break;
        }
    }
    Curve c;
    for (const auto& [x, vals] : points) {
        if (vals.size() != runs.size()) continue;
        double m = 0;
        for (double v : vals) m += v;
        m /= double(vals.size());
        double se = 0;
        if (vals.size() > 1) {
            double ss = 0;
            for (double v : vals) ss += (v - m) * (v - m);
            se = std::sqrt(ss / double(vals.size() - 1) / double(vals.size()));
        }
        c.x.push_back(x);
        c.mean.push_back(m);
        c.stderr_.push_back(se);
    }
    return c;
}

void write_metrics_csv(const std::filesystem::path& path, const MetricsLog& log) {
    auto out = open_out(path);
    out << "t,nll,correct,task_id,within_task_pos\n";
    for (const auto& r : log.records) {
        out << r.position << ',' << fmt(r.nll) << ',' << (r.correct ? 1 : 0) << ',' << r.task_id << ','
            << r.within_task_pos << '\n';
    }
    if (!out) throw DataError("failed writing " + path.string());
}

MetricsLog read_metrics_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line) || line != "t,nll,correct,task_id,within_task_pos") {
        throw DataError(path.string() + ": missing metrics header");
    }
    MetricsLog log;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (cells.size() != 5) {
            throw DataError(path.string() + ":" + std::to_string(lineno) + ": expected 5 columns");
        }
        try {
            MetricRecord r;
            r.position = std::stoll(cells[0]);
            r.nll = std::stod(cells[1]);
            r.correct = std::stoi(cells[2]) != 0;
            r.task_id = std::stoi(cells[3]);
            r.within_task_pos = std::stoi(cells[4]);
            log.records.push_back(r);
        } catch (const std::logic_error&) {
            throw DataError(path.string() + ":" + std::to_string(lineno) + ": malformed number");
        }
    }
    return log;
}

std::string summary_text(const Summary& s, const std::map<std::string, std::string>& extra) {
    std::ostringstream out;
    out << "examples = " << s.examples << '\n'
        << "cumulative_nll = " << fmt(s.cumulative_nll) << '\n'
        << "mean_nll = " << fmt(s.mean_nll) << '\n'
        << "average_accuracy = " << fmt(s.average_accuracy) << '\n'
        << "macs_total = " << s.macs_total << '\n'
        << "num_tasks = " << s.per_task.size() << '\n';
    for (const auto& [k, v] : extra) out << k << " = " << v << '\n';
    return out.str();
}

void write_summary(const std::filesystem::path& path, const Summary& summary,
                   const std::map<std::string, std::string>& extra) {
    auto out = open_out(path);
    out << summary_text(summary, extra);
    if (!out) throw DataError("failed writing " + path.string());
}

void write_curve(const std::filesystem::path& path, const Curve& curve) {
    auto out = open_out(path);
    out << "x,mean,stderr\n";
    for (std::size_t i = 0; i < curve.x.size(); ++i)
        out << fmt(curve.x[i]) << ',' << fmt(curve.mean[i]) << ',' << fmt(curve.stderr_[i]) << '\n';
    if (!out) throw DataError("failed writing " + path.string());
}

}  // namespace ocltx::eval
