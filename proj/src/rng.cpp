#include "reslab/rng.hpp"

namespace reslab {

PathRng::PathRng(std::uint64_t seed, std::uint64_t path) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(path), static_cast<std::uint32_t>(path >> 32), 0x5eedu};
    engine_.seed(seq);
}

}  // namespace reslab
