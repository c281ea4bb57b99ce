#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "meshparse/geometry.hpp"

namespace meshparse {

// Uniform double in [0,1) from the raw 64-bit engine output. Unlike
// std::uniform_real_distribution this is identical across standard libraries.
inline double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline std::vector<Vec3f> uniform_cloud(std::size_t n, std::mt19937_64& rng) {
    std::vector<Vec3f> pts(n);
    for (auto& p : pts)
        p = {static_cast<float>(unit_uniform(rng)), static_cast<float>(unit_uniform(rng)),
             static_cast<float>(unit_uniform(rng))};
    return pts;
}

}  // namespace meshparse
