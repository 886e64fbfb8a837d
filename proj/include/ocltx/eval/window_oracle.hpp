#pragma once

#include <span>

namespace ocltx::eval {

// Average accuracy of a predictor that scores position t correct iff its
// label occurred among the `window` preceding labels. Positions without
// history are incorrect. Throws std::invalid_argument for window < 1.
double window_oracle(std::span<const int> labels, int window);

}  // namespace ocltx::eval
