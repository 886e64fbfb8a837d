#include "ocltx/numerics/mac_counter.hpp"

namespace ocltx::num {

MacCount& mac_counter() {
    thread_local MacCount count;
    return count;
}

void reset_mac_counter() { mac_counter() = MacCount{}; }

}  // namespace ocltx::num
