#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "meshparse/error.hpp"
#include "meshparse/geometry.hpp"
#include "meshparse/parallel.hpp"

namespace meshparse {

// Per-axis min-max normalization into [0,1]^3. An axis with zero extent maps to 0.
template <typename T>
std::vector<Vec3<T>> normalize_unit_cube(std::span<const Vec3<T>> points) {
    require(!points.empty(), "normalize_unit_cube: empty point set");
    Vec3<T> lo = points[0], hi = points[0];
    for (const auto& p : points)
        for (std::size_t a = 0; a < 3; ++a) {
            lo[a] = std::min(lo[a], p[a]);
            hi[a] = std::max(hi[a], p[a]);
        }
    std::vector<Vec3<T>> out(points.size());
    for (std::size_t i = 0; i < points.size(); ++i)
        for (std::size_t a = 0; a < 3; ++a) {
            const T extent = hi[a] - lo[a];
            out[i][a] = extent > T(0) ? (points[i][a] - lo[a]) / extent : T(0);
        }
    return out;
}

template <typename T>
std::vector<Vec3<T>> normalize_unit_cube(const std::vector<Vec3<T>>& points) {
    return normalize_unit_cube(std::span<const Vec3<T>>(points));
}

namespace detail {

// Spreads the low 21 bits of v so that bit i lands on bit 3i.
constexpr std::uint64_t spread_by_3(std::uint64_t v) {
    v &= 0x1FFFFFull;
    v = (v | (v << 32)) & 0x001F00000000FFFFull;
    v = (v | (v << 16)) & 0x001F0000FF0000FFull;
    v = (v | (v << 8)) & 0x100F00F00F00F00Full;
    v = (v | (v << 4)) & 0x10C30C30C30C30C3ull;
    v = (v | (v << 2)) & 0x1249249249249249ull;
    return v;
}

}  // namespace detail

inline constexpr int kMaxMortonBits = 21;

// Quantizes a coordinate in [0,1] to B bits: floor(c * (2^B - 1) + 0.5).
inline std::uint32_t quantize_unit(double c, int bits) {
    const double scale = static_cast<double>((1u << bits) - 1u);
    return static_cast<std::uint32_t>(std::floor(c * scale + 0.5));
}

// Interleaves quantized coordinates as x1 y1 z1 x2 y2 z2 ... (x1 = most significant
// bit of x). The code is fixed-width: 3*bits bits, leading zeros kept.
template <typename T>
std::uint64_t morton_encode(const Vec3<T>& p, int bits_per_axis) {
    require(bits_per_axis >= 1 && bits_per_axis <= kMaxMortonBits,
            "morton_encode: bits_per_axis must be in [1, 21]");
    std::uint64_t q[3];
    for (std::size_t a = 0; a < 3; ++a) {
        const double c = static_cast<double>(p[a]);
        require(c >= 0.0 && c <= 1.0, "morton_encode: coordinate outside [0,1]");
        q[a] = quantize_unit(c, bits_per_axis);
    }
    return (detail::spread_by_3(q[0]) << 2) | (detail::spread_by_3(q[1]) << 1) | detail::spread_by_3(q[2]);
}

struct MortonCode {
    std::uint64_t code = 0;
    std::uint32_t point_index = 0;
};

// Half-open range [begin, end) into WindowPartition::order.
struct IndexRange {
    std::size_t begin = 0;
    std::size_t end = 0;
    std::size_t size() const { return end - begin; }
    friend bool operator==(const IndexRange&, const IndexRange&) = default;
};

struct WindowPartition {
    std::vector<std::uint32_t> order;  // point indices in Morton order
    std::vector<std::uint64_t> codes;  // codes[i] belongs to order[i]
    std::size_t window_size = 5000;
    std::vector<IndexRange> windows;
    // Virtual slots completing the final window. Never materialized as points.
    std::size_t pad_count = 0;

    std::size_t window_count() const { return windows.size(); }
    std::span<const std::uint32_t> window(std::size_t w) const {
        return std::span<const std::uint32_t>(order).subspan(windows[w].begin, windows[w].size());
    }
};

struct PartitionOptions {
    std::size_t window_size = 5000;
    int bits_per_axis = 16;
};

// Number of windows: ceil(n / window_size).
inline std::size_t window_count(std::size_t n, std::size_t window_size) {
    require(window_size > 0, "window_size must be positive");
    return (n + window_size - 1) / window_size;
}

// Normalizes, encodes, sorts by (code, index) and cuts the order into windows.
template <typename T>
WindowPartition partition(std::span<const Vec3<T>> points, PartitionOptions opts = {}) {
    require(!points.empty(), "partition: empty point set");
    require(opts.window_size > 0, "partition: window_size must be positive");
    const auto unit = normalize_unit_cube(points);
    std::vector<MortonCode> codes(points.size());
    parallel_for((points.size() + 4095) / 4096, [&](std::size_t chunk) {
        const std::size_t end = std::min(points.size(), (chunk + 1) * 4096);
        for (std::size_t i = chunk * 4096; i < end; ++i)
            codes[i] = {morton_encode(unit[i], opts.bits_per_axis), static_cast<std::uint32_t>(i)};
    });
    std::sort(codes.begin(), codes.end(), [](const MortonCode& a, const MortonCode& b) {
        return a.code != b.code ? a.code < b.code : a.point_index < b.point_index;
    });

    WindowPartition wp;
    wp.window_size = opts.window_size;
    wp.order.reserve(codes.size());
    wp.codes.reserve(codes.size());
    for (const auto& c : codes) {
        wp.order.push_back(c.point_index);
        wp.codes.push_back(c.code);
    }
    const std::size_t n = points.size();
    const std::size_t w = window_count(n, opts.window_size);
    for (std::size_t i = 0; i < w; ++i) wp.windows.push_back({i * opts.window_size, std::min(n, (i + 1) * opts.window_size)});
    const std::size_t tail = n % opts.window_size;
    wp.pad_count = tail == 0 ? 0 : opts.window_size - tail;
    return wp;
}

template <typename T>
WindowPartition partition(const std::vector<Vec3<T>>& points, PartitionOptions opts = {}) {
    return partition(std::span<const Vec3<T>>(points), opts);
}

}  // namespace meshparse
