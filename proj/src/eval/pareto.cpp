#include "ocltx/eval/pareto.hpp"

#include <algorithm>

namespace ocltx::eval {

std::vector<SweepPoint> pareto_front(const std::vector<SweepPoint>& points) {
    std::vector<SweepPoint> ok;
    for (const auto& p : points)
        if (!p.failed) ok.push_back(p);
    std::stable_sort(ok.begin(), ok.end(), [](const SweepPoint& a, const SweepPoint& b) {
        if (a.macs_total != b.macs_total) return a.macs_total < b.macs_total;
        return a.accuracy > b.accuracy;
    });
    std::vector<SweepPoint> front;
    for (const auto& p : ok) {
        if (front.empty() || p.accuracy > front.back().accuracy) front.push_back(p);
    }
    return front;
}

}  // namespace ocltx::eval
