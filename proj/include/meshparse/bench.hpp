#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "meshparse/fps.hpp"
#include "meshparse/morton.hpp"
#include "meshparse/random.hpp"

namespace meshparse {

struct BenchRow {
    std::string method;  // "exact" or "windowed"
    double median_seconds = 0;
    double covering_radius = 0;
    std::size_t samples = 0;
};

struct BenchResult {
    std::vector<BenchRow> rows;
    bool identical_sets = false;  // whether both methods selected the same index set (last trial)

    double speedup() const { return rows.size() == 2 && rows[1].median_seconds > 0 ? rows[0].median_seconds / rows[1].median_seconds : 0; }
};

struct BenchOptions {
    std::size_t n = 100000;
    std::size_t k = 10000;
    std::size_t window_size = 5000;
    int trials = 3;
    std::uint64_t seed = 0;
};

// Times exact vs windowed FPS on the same uniform clouds (one fresh cloud per
// trial). Windowed timing includes the Morton partition and plan.
inline BenchResult bench_fps(const BenchOptions& opts) {
    require(opts.n >= opts.k, "bench_fps: n must be >= k");
    require(opts.trials >= 1, "bench_fps: trials must be >= 1");
    std::mt19937_64 rng(opts.seed);
    std::vector<double> t_exact, t_windowed;
    double r_exact = 0, r_windowed = 0;
    bool identical = false;
    using clock = std::chrono::steady_clock;
    for (int trial = 0; trial < opts.trials; ++trial) {
        const auto cloud = uniform_cloud(opts.n, rng);

        auto t0 = clock::now();
        const auto part = partition(cloud, {opts.window_size, 16});
        const auto plan = build_plan(part, opts.k);
        const auto windowed = fps_windowed(cloud, part, plan);
        auto t1 = clock::now();
        const auto exact = fps_exact(cloud, opts.k);
        auto t2 = clock::now();

        t_windowed.push_back(std::chrono::duration<double>(t1 - t0).count());
        t_exact.push_back(std::chrono::duration<double>(t2 - t1).count());
        r_windowed = covering_radius(cloud, windowed);
        r_exact = covering_radius(cloud, exact);
        auto a = exact, b = windowed;
        std::sort(a.begin(), a.end());
        std::sort(b.begin(), b.end());
        identical = a == b;
    }
    auto median = [](std::vector<double> v) {
        std::sort(v.begin(), v.end());
        const std::size_t m = v.size() / 2;
        return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
    };
    BenchResult r;
    r.rows.push_back({"exact", median(t_exact), r_exact, opts.k});
    r.rows.push_back({"windowed", median(t_windowed), r_windowed, opts.k});
    r.identical_sets = identical;
    return r;
}

inline void write_bench_csv(const BenchResult& r, const BenchOptions& opts, std::ostream& out) {
    out << "method,n,k,window_size,trials,median_seconds,covering_radius\n";
    for (const auto& row : r.rows)
        out << row.method << ',' << opts.n << ',' << opts.k << ',' << opts.window_size << ',' << opts.trials << ','
            << row.median_seconds << ',' << row.covering_radius << '\n';
}

}  // namespace meshparse
