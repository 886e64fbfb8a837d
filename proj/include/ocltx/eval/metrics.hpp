#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace ocltx::eval {

struct MetricRecord {
    std::int64_t position = 0;
    double nll = 0.0;  // nats
    bool correct = false;
    int task_id = 0;
    int within_task_pos = 0;
};

// Stream-0 prediction record, one entry per sequence position.
struct MetricsLog {
    std::vector<MetricRecord> records;

    std::size_t size() const { return records.size(); }
    // Throws StateError unless positions are exactly 0..size()-1 in order and
    // every nll is finite and >= 0.
    void validate() const;
    // Appends `other`, renumbering its positions to follow this log.
    void append(const MetricsLog& other);
};

struct GroupStat {
    int key = 0;  // task id or within-task position
    std::size_t count = 0;
    double mean_accuracy = 0.0;
    double mean_nll = 0.0;
};

struct Summary {
    std::int64_t examples = 0;
    double cumulative_nll = 0.0;
    double mean_nll = 0.0;
    double average_accuracy = 0.0;
    std::vector<double> running_accuracy;  // mean correctness over positions 0..t
    std::vector<GroupStat> per_task;       // sorted by task id
    std::vector<GroupStat> within_task;    // sorted by within-task position
    std::uint64_t macs_total = 0;

    // Mean of per-task accuracies over tasks [first, last] (inclusive, 0-based ids).
    double task_range_accuracy(int first, int last) const;
};

// Pure function of the log. Throws StateError for incomplete logs.
Summary summarize(const MetricsLog& log);

struct Curve {
    std::vector<double> x;
    std::vector<double> mean;
    std::vector<double> stderr_;
};

enum class CurveKind { running_accuracy, per_task_accuracy, per_task_nll, within_task_accuracy, within_task_nll };

std::string to_string(CurveKind kind);

// Mean and standard error across runs (e.g. data seeds), pointwise over the
// x values shared by all runs.
Curve aggregate(std::span<const Summary> runs, CurveKind kind);

// CSV with header "t,nll,correct,task_id,within_task_pos". NLLs are written
// with round-trip precision.
void write_metrics_csv(const std::filesystem::path& path, const MetricsLog& log);
MetricsLog read_metrics_csv(const std::filesystem::path& path);

// "key = value" lines: examples, cumulative_nll, mean_nll, average_accuracy,
// macs_total, num_tasks, plus any `extra` entries.
std::string summary_text(const Summary& summary, const std::map<std::string, std::string>& extra = {});
void write_summary(const std::filesystem::path& path, const Summary& summary,
                   const std::map<std::string, std::string>& extra = {});

// CSV with header "x,mean,stderr".
void write_curve(const std::filesystem::path& path, const Curve& curve);

}  // namespace ocltx::eval
