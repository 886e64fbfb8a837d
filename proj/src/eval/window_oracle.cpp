#include "ocltx/eval/window_oracle.hpp"

#include <stdexcept>
#include <unordered_map>

namespace ocltx::eval {

double window_oracle(std::span<const int> labels, int window) {
    if (window < 1) throw std::invalid_argument("window_oracle: window must be >= 1, got " + std::to_string(window));
    if (labels.empty()) return 0.0;
    std::unordered_map<int, std::size_t> last_seen;
    std::size_t correct = 0;
    for (std::size_t t = 0; t < labels.size(); ++t) {
        auto it = last_seen.find(labels[t]);
        if (it != last_seen.end() && t - it->second <= std::size_t(window)) ++correct;
        last_seen[labels[t]] = t;
    }
    return double(correct) / double(labels.size());
}

}  // namespace ocltx::eval
