#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "meshparse/error.hpp"
#include "meshparse/geometry.hpp"
#include "meshparse/kdtree.hpp"
#include "meshparse/morton.hpp"
#include "meshparse/parallel.hpp"
#include "meshparse/types.hpp"

namespace meshparse {

// Greedy max-min sampling restricted to `candidates` (indices into `points`).
// Starts at candidates[seed_pos]; each step takes the unselected candidate with
// the largest squared distance to the selected set, lowest original index on ties.
// O(k * |candidates|) time, O(|candidates|) memory.
inline std::vector<std::uint32_t> fps_subset(std::span<const Vec3f> points, std::span<const std::uint32_t> candidates,
                                             std::size_t k, std::size_t seed_pos = 0) {
    require(k <= candidates.size(), "fps: k = " + std::to_string(k) + " exceeds " +
                                        std::to_string(candidates.size()) + " candidate points");
    std::vector<std::uint32_t> out;
    if (k == 0) return out;
    require(seed_pos < candidates.size(), "fps: seed out of range");
    out.reserve(k);
    const std::size_t n = candidates.size();
    std::vector<Vec3f> local(n);
    for (std::size_t i = 0; i < n; ++i) local[i] = points[candidates[i]];
    std::vector<float> min_d2(n, std::numeric_limits<float>::infinity());
    std::vector<char> taken(n, 0);

    std::size_t current = seed_pos;
    for (std::size_t step = 0; step < k; ++step) {
        taken[current] = 1;
        out.push_back(candidates[current]);
        if (step + 1 == k) break;
        const Vec3f c = local[current];
        std::size_t best = n;
        float best_d2 = -1.0f;
        for (std::size_t i = 0; i < n; ++i) {
            if (taken[i]) continue;
            const float d2 = std::min(min_d2[i], distance2(local[i], c));
            min_d2[i] = d2;
            if (d2 > best_d2 || (d2 == best_d2 && candidates[i] < candidates[best])) {
                best_d2 = d2;
                best = i;
            }
        }
        current = best;
    }
    return out;
}

// Farthest point sampling over the whole cloud, seeded at `seed_index`.
inline std::vector<std::uint32_t> fps_exact(std::span<const Vec3f> points, std::size_t k, std::uint32_t seed_index = 0) {
    require(k <= points.size(), "fps_exact: k = " + std::to_string(k) + " exceeds N = " + std::to_string(points.size()));
    if (k == 0) return {};
    require(seed_index < points.size(), "fps_exact: seed index out of range");
    std::vector<std::uint32_t> all(points.size());
    std::iota(all.begin(), all.end(), 0u);
    return fps_subset(points, all, k, seed_index);
}

struct SamplePlan {
    std::size_t total_samples = 0;
    std::vector<std::size_t> per_window_quota;
    std::map<Label, double> oversample_weights;  // absent labels weigh 1.0
};

namespace detail {

// Clamps quotas to window populations and hands the excess, one sample at a
// time, to the windows after the first clamped one (wrapping around).
inline void cap_and_redistribute(std::vector<std::size_t>& quota, const std::vector<std::size_t>& population) {
    std::size_t excess = 0;
    std::optional<std::size_t> first_capped;
    for (std::size_t w = 0; w < quota.size(); ++w)
        if (quota[w] > population[w]) {
            excess += quota[w] - population[w];
            quota[w] = population[w];
            if (!first_capped) first_capped = w;
        }
    if (excess == 0) return;
    const std::size_t W = quota.size();
    std::size_t w = (*first_capped + 1) % W;
    while (excess > 0) {
        if (quota[w] < population[w]) {
            ++quota[w];
            --excess;
        }
        w = (w + 1) % W;
    }
}

}  // namespace detail

// Splits k samples across the windows of `part`.
//
// Unweighted: floor(k/W) per window plus one for the first k mod W windows.
// Weighted: each window's even share is scaled by the mean oversampling weight
// of its points, then k is apportioned by largest remainder (ties to the lower
// window). Uniform weights therefore reproduce the unweighted plan. In both
// cases quotas are capped by window population.
inline SamplePlan build_plan(const WindowPartition& part, std::size_t k, std::span<const Label> labels = {},
                             const std::map<Label, double>& weights = {}) {
    const std::size_t n = part.order.size();
    require(k <= n, "build_plan: k = " + std::to_string(k) + " exceeds N = " + std::to_string(n));
    require(weights.empty() || labels.size() == n, "build_plan: oversampling weights need one label per point");
    for (const auto& [label, w] : weights)
        require(w > 0 && std::isfinite(w), "build_plan: weight for label " + std::to_string(label) + " must be positive");

    const std::size_t W = part.window_count();
    std::vector<std::size_t> population(W);
    for (std::size_t w = 0; w < W; ++w) population[w] = part.windows[w].size();

    SamplePlan plan;
    plan.total_samples = k;
    plan.oversample_weights = weights;
    std::vector<std::size_t> quota(W);
    for (std::size_t w = 0; w < W; ++w) quota[w] = k / W + (w < k % W ? 1 : 0);

    if (!weights.empty()) {
        std::vector<double> mass(W);
        double total = 0;
        for (std::size_t w = 0; w < W; ++w) {
            double sum = 0;
            for (auto idx : part.window(w)) {
                auto it = weights.find(labels[idx]);
                sum += it == weights.end() ? 1.0 : it->second;
            }
            mass[w] = static_cast<double>(quota[w]) * (sum / static_cast<double>(population[w]));
            total += mass[w];
        }
        if (total > 0) {
            std::vector<double> remainder(W);
            std::size_t assigned = 0;
            for (std::size_t w = 0; w < W; ++w) {
                const double ideal = static_cast<double>(k) * mass[w] / total;
                quota[w] = static_cast<std::size_t>(std::floor(ideal));
                remainder[w] = ideal - static_cast<double>(quota[w]);
                assigned += quota[w];
            }
            std::vector<std::size_t> by_remainder(W);
            std::iota(by_remainder.begin(), by_remainder.end(), std::size_t{0});
            std::stable_sort(by_remainder.begin(), by_remainder.end(),
                             [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
            for (std::size_t i = 0; assigned < k; ++i, ++assigned) ++quota[by_remainder[i % W]];
        }
    }
    detail::cap_and_redistribute(quota, population);
    plan.per_window_quota = std::move(quota);
    return plan;
}

// Runs FPS independently inside each window (seeded at the window's lowest
// original index) and concatenates the picks in window order. Pad slots are
// virtual and can never be returned.
inline std::vector<std::uint32_t> fps_windowed(std::span<const Vec3f> points, const WindowPartition& part,
                                               const SamplePlan& plan) {
    const std::size_t W = part.window_count();
    require(plan.per_window_quota.size() == W, "fps_windowed: plan has " + std::to_string(plan.per_window_quota.size()) +
                                                    " quotas for " + std::to_string(W) + " windows");
    require(part.order.size() == points.size(), "fps_windowed: partition does not match point count");
    std::size_t sum = 0;
    for (std::size_t w = 0; w < W; ++w) {
        require(plan.per_window_quota[w] <= part.windows[w].size(),
                "fps_windowed: quota of window " + std::to_string(w) + " exceeds its population");
        sum += plan.per_window_quota[w];
    }
    require(sum == plan.total_samples, "fps_windowed: quotas do not sum to k");

    std::vector<std::vector<std::uint32_t>> picks(W);
    parallel_for(W, [&](std::size_t w) {
        const auto win = part.window(w);
        if (win.empty()) return;
        const auto seed = static_cast<std::size_t>(std::min_element(win.begin(), win.end()) - win.begin());
        picks[w] = fps_subset(points, win, plan.per_window_quota[w], seed);
    });
    std::vector<std::uint32_t> out;
    out.reserve(sum);
    for (auto& p : picks) out.insert(out.end(), p.begin(), p.end());
    return out;
}

// Largest distance from any point to its nearest selected sample.
inline double covering_radius(std::span<const Vec3f> points, std::span<const std::uint32_t> samples) {
    require(!samples.empty(), "covering_radius: no samples");
    KdTree tree(points, std::vector<std::uint32_t>(samples.begin(), samples.end()));
    double worst = 0;
    for (const auto& p : points) worst = std::max(worst, tree.nearest(p).distance2);
    return std::sqrt(worst);
}

}  // namespace meshparse
