#pragma once

#include <vector>

namespace ocltx::model {

struct Example {
    std::vector<float> features;  // dim F
    int label = 0;                // in [0, K)
};

}  // namespace ocltx::model
