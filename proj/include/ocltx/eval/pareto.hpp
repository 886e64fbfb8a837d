#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace ocltx::eval {

struct SweepPoint {
    std::string label;
    std::uint64_t macs_total = 0;
    double accuracy = 0.0;
    bool failed = false;
    std::string error;
};

// Non-dominated points (fewer MACs or higher accuracy), ordered by ascending
// MACs; accuracy is strictly increasing along the result. Failed points are
// ignored.
std::vector<SweepPoint> pareto_front(const std::vector<SweepPoint>& points);

}  // namespace ocltx::eval
