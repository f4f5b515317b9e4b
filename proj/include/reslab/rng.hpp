#pragma once

#include <cstdint>
#include <random>

namespace reslab {

// Independent normal stream per (seed, path). The stream does not depend on
// which worker runs the path, so results are identical for any thread count.
class PathRng {
public:
    PathRng(std::uint64_t seed, std::uint64_t path);

    double normal() { return normal_(engine_); }
    double uniform() { return uniform_(engine_); }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace reslab
