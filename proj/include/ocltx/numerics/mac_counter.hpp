#pragma once

#include <cstdint>

namespace ocltx::num {

// Multiply-accumulate operations issued by matrix-product style kernels on
// the calling thread. Elementwise work (softmax, norms, activations) is not
// counted.
struct MacCount {
    std::uint64_t forward = 0;
    std::uint64_t backward = 0;

    std::uint64_t total() const { return forward + backward; }
};

MacCount& mac_counter();
void reset_mac_counter();

}  // namespace ocltx::num
