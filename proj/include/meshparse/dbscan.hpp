#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <deque>
#include <span>
#include <unordered_map>
#include <vector>

#include "meshparse/error.hpp"
#include "meshparse/geometry.hpp"
#include "meshparse/parallel.hpp"

namespace meshparse {

struct DbscanParams {
    double epsilon = 0.03;
    std::size_t min_samples = 100;
    std::size_t knn_k = 40;  // used by label denoising, not by clustering itself

    void validate() const {
        require(epsilon > 0 && std::isfinite(epsilon), "dbscan: epsilon must be positive");
        require(min_samples >= 1, "dbscan: min_samples must be >= 1");
        require(knn_k >= 1, "dbscan: knn_k must be >= 1");
    }
};

inline constexpr std::int32_t kNoise = -1;

namespace detail {

// Uniform grid with cell size epsilon: every epsilon-neighbor of a point lies in
// the 27 cells around it.
class EpsilonGrid {
public:
    EpsilonGrid(std::span<const Vec3f> points, double epsilon) : points_(points), inv_cell_(1.0 / epsilon) {
        cells_.reserve(points.size());
        for (std::uint32_t i = 0; i < points.size(); ++i) cells_[key(cell_of(points[i]))].push_back(i);
    }

    template <typename Fn>
    void for_each_candidate(const Vec3f& p, Fn&& fn) const {
        const auto c = cell_of(p);
        for (std::int64_t dx = -1; dx <= 1; ++dx)
            for (std::int64_t dy = -1; dy <= 1; ++dy)
                for (std::int64_t dz = -1; dz <= 1; ++dz) {
                    auto it = cells_.find(key({c[0] + dx, c[1] + dy, c[2] + dz}));
                    if (it == cells_.end()) continue;
                    for (auto j : it->second) fn(j);
                }
    }

private:
    std::array<std::int64_t, 3> cell_of(const Vec3f& p) const {
        return {static_cast<std::int64_t>(std::floor(p.x * inv_cell_)),
                static_cast<std::int64_t>(std::floor(p.y * inv_cell_)),
                static_cast<std::int64_t>(std::floor(p.z * inv_cell_))};
    }
    static std::uint64_t key(const std::array<std::int64_t, 3>& c) {
        // 21 bits per axis, offset to keep negative cells distinct.
        constexpr std::int64_t off = 1 << 20;
        auto part = [](std::int64_t v) { return static_cast<std::uint64_t>(v + off) & 0x1FFFFFull; };
        return (part(c[0]) << 42) | (part(c[1]) << 21) | part(c[2]);
    }

    std::span<const Vec3f> points_;
    double inv_cell_;
    std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> cells_;
};

}  // namespace detail

// Density-based clustering. A point is core when at least min_samples points
// (itself included) lie within epsilon. Clusters are the epsilon-connected
// components of core points, numbered 0, 1, ... in order of their lowest core
// index. A non-core point within epsilon of a core joins the lowest-numbered
// such cluster; otherwise it is noise (-1).
inline std::vector<std::int32_t> dbscan(std::span<const Vec3f> points, const DbscanParams& params) {
    params.validate();
    const std::size_t n = points.size();
    std::vector<std::int32_t> cluster(n, kNoise);
    if (n < params.min_samples || n == 0) return cluster;

    const double eps2 = params.epsilon * params.epsilon;
    const detail::EpsilonGrid grid(points, params.epsilon);
    auto within = [&](std::uint32_t i, std::uint32_t j) {
        return distance2(points[i].cast<double>(), points[j].cast<double>()) <= eps2;
    };

    std::vector<char> core(n, 0);
    constexpr std::size_t kChunk = 1024;
    parallel_for((n + kChunk - 1) / kChunk, [&](std::size_t chunk) {
        const std::size_t end = std::min(n, (chunk + 1) * kChunk);
        for (std::size_t i = chunk * kChunk; i < end; ++i) {
            std::size_t count = 0;
            const auto ii = static_cast<std::uint32_t>(i);
            grid.for_each_candidate(points[i], [&](std::uint32_t j) { count += within(ii, j); });
            core[i] = count >= params.min_samples;
        }
    });

    std::int32_t next_id = 0;
    std::deque<std::uint32_t> queue;
    for (std::uint32_t seed = 0; seed < n; ++seed) {
        if (!core[seed] || cluster[seed] != kNoise) continue;
        const std::int32_t id = next_id++;
        cluster[seed] = id;
        queue.push_back(seed);
        while (!queue.empty()) {
            const auto i = queue.front();
            queue.pop_front();
            grid.for_each_candidate(points[i], [&](std::uint32_t j) {
                if (core[j] && cluster[j] == kNoise && within(i, j)) {
                    cluster[j] = id;
                    queue.push_back(j);
                }
            });
        }
    }

    for (std::uint32_t i = 0; i < n; ++i) {
        if (core[i]) continue;
        std::int32_t best = kNoise;
        grid.for_each_candidate(points[i], [&](std::uint32_t j) {
            if (core[j] && within(i, j) && (best == kNoise || cluster[j] < best)) best = cluster[j];
        });
        cluster[i] = best;
    }
    return cluster;
}

}  // namespace meshparse
