// Acceptance run: one PASS/FAIL line per criterion.

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <string>

#include "meshparse/meshparse.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace meshparse;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

template <typename... A>
std::string fmt(const char* f, A... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

Outcome morton() {
    std::mt19937_64 rng(101);
    const auto pts = uniform_cloud(100000, rng);
    const auto t0 = std::chrono::steady_clock::now();
    const auto part = partition(pts, {pts.size(), 10});
    const auto want = oracle::morton_order(pts, 10);
    const double s = seconds_since(t0);
    const bool same = part.order == want;
    return {same && s < 5, fmt("sort by code %s bit-string oracle on 100000 points, B=10, %.2f s", same ? "equals" : "DIFFERS from", s)};
}

Outcome windowed_degenerate() {
    std::mt19937_64 rng(102);
    int ok = 0;
    for (int c = 0; c < 50; ++c) {
        const std::size_t n = 1 + rng() % 5000;
        const std::size_t k = 1 + rng() % n;
        const auto pts = uniform_cloud(n, rng);
        const auto part = partition(pts, {n, 16});
        auto w = fps_windowed(pts, part, build_plan(part, k));
        auto e = fps_exact(pts, k);
        std::sort(w.begin(), w.end());
        std::sort(e.begin(), e.end());
        ok += w == e;
    }
    return {ok == 50, fmt("%d/50 clouds: single-window output set equals fps_exact", ok)};
}

Outcome fps_oracle() {
    std::mt19937_64 rng(103);
    int ok = 0;
    for (int c = 0; c < 100; ++c) {
        const std::size_t n = 1 + rng() % 500;
        const std::size_t k = 1 + rng() % n;
        const auto pts = uniform_cloud(n, rng);
        ok += fps_exact(pts, k) == oracle::fps(pts, k);
    }
    return {ok == 100, fmt("%d/100 clouds: fps_exact equals recompute oracle, order included", ok)};
}

Outcome complexity() {
    const auto t0 = std::chrono::steady_clock::now();
    BenchOptions opts;
    opts.n = 100000;
    opts.k = 10000;
    opts.window_size = 5000;
    opts.trials = 3;
    opts.seed = 104;
    const auto r = bench_fps(opts);
    const double total = seconds_since(t0);
    const auto& exact = r.rows[0];
    const auto& win = r.rows[1];
    const bool fast = win.median_seconds * 4 <= exact.median_seconds;
    const bool cover = win.covering_radius <= 2 * exact.covering_radius;
    return {fast && cover && total < 60,
            fmt("exact %.3f s, windowed %.3f s (%.1fx); covering radius %.4f vs %.4f (ratio %.2f); %.1f s total",
                exact.median_seconds, win.median_seconds, r.speedup(), win.covering_radius, exact.covering_radius,
                win.covering_radius / exact.covering_radius, total)};
}

Outcome raster() {
    std::mt19937_64 rng(105);
    const auto t0 = std::chrono::steady_clock::now();
    std::size_t agree = 0, total = 0;
    for (int s = 0; s < 100; ++s) {
        const auto m = oracle::random_scene(rng, 20);
        ViewSpec v;
        v.width = v.height = 128;
        v.azimuth_deg = double(rng() % 360);
        v.elevation_deg = double(rng() % 140) - 70;
        const auto b = rasterize(m, v);
        const auto ref = oracle::raycast(m, v);
        for (std::size_t i = 0; i < ref.data.size(); ++i) agree += b.triangle_id.data[i] == ref.data[i];
        total += ref.data.size();
    }
    const double frac = double(agree) / double(total), s = seconds_since(t0);
    return {frac >= 0.995 && s < 30, fmt("pixel agreement %.4f%% over 100 scenes at 128x128, %.2f s", 100 * frac, s)};
}

Outcome dbscan_oracle() {
    std::mt19937_64 rng(106);
    std::uniform_real_distribution<float> u(-1, 1);
    int ok = 0;
    for (int c = 0; c < 200; ++c) {
        const std::size_t n = 1 + rng() % 2000;
        std::vector<Vec3f> pts;
        const int blobs = 1 + int(rng() % 5);
        std::vector<Vec3f> centers;
        for (int b = 0; b < blobs; ++b) centers.push_back(uniform_cloud(1, rng)[0]);
        const float spread = 0.02f + 0.1f * float(unit_uniform(rng));
        while (pts.size() < n) {
            if (rng() % 10 == 0) pts.push_back(uniform_cloud(1, rng)[0]);
            else pts.push_back(centers[rng() % centers.size()] + Vec3f{u(rng), u(rng), u(rng)} * spread);
        }
        const double eps = 0.005 + 0.05 * unit_uniform(rng);
        const std::size_t ms = 1 + rng() % 30;
        ok += oracle::same_clustering(oracle::dbscan(pts, eps, ms), dbscan(pts, {eps, ms, 40}));
    }
    return {ok == 200, fmt("%d/200 instances match the O(N^2) reference up to id permutation", ok)};
}

Outcome metrics() {
    auto rel = [](double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(b)); };
    bool hand = true;
    {
        ConfusionMatrix cm(2);
        cm.at(0, 0) = 3, cm.at(0, 1) = 1, cm.at(1, 0) = 1, cm.at(1, 1) = 3;
        const auto r = evaluate(cm);
        hand &= rel(r.miou, 60) && rel(r.fw_miou, 60) && rel(r.acc, 75);
    }
    {
        ConfusionMatrix cm(3);
        for (int i = 0; i < 3; ++i) cm.at(i, i) = 4 + i;
        const auto r = evaluate(cm);
        hand &= rel(r.miou, 100) && rel(r.fw_miou, 100) && rel(r.acc, 100);
    }
    {
        ConfusionMatrix cm(2);
        cm.at(1, 1) = 4;
        const auto r = evaluate(cm);
        hand &= rel(r.miou, 100) && !r.per_class_iou[0].iou;
    }
    {
        ConfusionMatrix cm(3);
        cm.at(0, 0) = 4, cm.at(0, 1) = 1, cm.at(1, 0) = 2, cm.at(1, 1) = 1;
        const auto r = evaluate(cm);
        hand &= rel(r.miou, 100 * (4.0 / 7 + 0.25) / 2) && rel(r.fw_miou, 100 * (5 * 4.0 / 7 + 3 * 0.25) / 8) &&
                rel(r.acc, 62.5);
    }
    std::mt19937_64 rng(107);
    int holds = 0;
    for (int c = 0; c < 1000; ++c) {
        const std::size_t n = 1 + rng() % 20;
        ConfusionMatrix cm(n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) cm.at(i, j) = rng() % 3 == 0 ? 0 : rng() % 1000;
        if (cm.total() == 0) cm.at(0, 0) = 1;
        const auto r = evaluate(cm);
        holds += r.acc + 1e-9 >= r.fw_miou;
    }
    return {hand && holds == 1000, fmt("hand cases %s; Acc >= fw mIoU on %d/1000 random matrices", hand ? "match" : "MISMATCH", holds)};
}

struct EndToEnd {
    TempDir dir{"acceptance"};
    SyntheticDataset data;
    std::string manifest;
};

Outcome end_to_end(EndToEnd& e2e) {
    const auto t0 = std::chrono::steady_clock::now();
    e2e.data = write_synthetic_dataset(e2e.dir.path, HumanoidOptions{});
    const auto res = run_pipeline(load_pipeline_config(e2e.data.config));
    const double s = seconds_since(t0);
    e2e.manifest = read_text(e2e.dir / "out/manifest.json");
    std::size_t visible = 0, agree = 0;
    for (std::size_t v = 0; v < res.denoised.size(); ++v)
        if (res.votes.voted(v)) {
            ++visible;
            agree += res.denoised.labels[v] == e2e.data.bundle.humanoid.ground_truth.labels[v];
        }
    const double frac = visible ? double(agree) / double(visible) : 0;
    return {frac >= 0.95 && s < 120,
            fmt("%zu vertices, %zu visible, %.2f%% visible agreement, %.1f s", res.denoised.size(), visible, 100 * frac, s)};
}

Outcome orientation() {
    const auto h = build_humanoid(SyntheticHumanoid::from_seed(0, 300));
    const KeypointOracle est(h.triangle_keypoint, h.mesh, canonical_front_view());
    struct Case {
        const char* name;
        Vec3d axis;
        double angle;
    };
    const Case cases[] = {{"upside-down", {0, 0, 1}, M_PI},
                          {"rear-facing", {0, 1, 0}, M_PI},
                          {"side-lying", {0, 0, 1}, M_PI / 2},
                          {"pi/8 lean", {1, 0, 0}, M_PI / 8}};
    bool all = true;
    std::string detail;
    for (const auto& c : cases) {
        const auto res = correct_orientation(rotate_mesh(h.mesh, axis_angle(c.axis, c.angle)), est, default_renderer());
        const double ear = mean_ear_confidence(res.last_keypoints);
        const bool ok = res.converged && res.estimator_calls <= 10 && ear > 0.4;
        all &= ok;
        detail += fmt("%s%s: %d calls, ear %.2f%s", detail.empty() ? "" : "; ", c.name, res.estimator_calls, ear,
                      ok ? "" : " (not converged)");
    }
    return {all, detail};
}

Outcome determinism(EndToEnd& e2e) {
    run_pipeline(load_pipeline_config(e2e.data.config));
    const auto again = read_text(e2e.dir / "out/manifest.json");
    const bool same = !e2e.manifest.empty() && again == e2e.manifest;
    return {same, fmt("second run manifest %s (sha256 %.16s...)", same ? "identical" : "DIFFERS", sha256_hex(again).c_str())};
}

}  // namespace

int main() {
    EndToEnd e2e;
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"morton order", morton},
        {"windowed fps, one window", windowed_degenerate},
        {"fps greedy oracle", fps_oracle},
        {"windowed fps speed and coverage", complexity},
        {"rasterizer vs ray cast", raster},
        {"dbscan oracle", dbscan_oracle},
        {"metrics", metrics},
        {"end-to-end synthetic pipeline", [&] { return end_to_end(e2e); }},
        {"orientation loop", orientation},
        {"determinism", [&] { return determinism(e2e); }},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& ex) {
            o = {false, std::string("threw: ") + ex.what()};
        }
        failed += !o.pass;
        std::printf("criterion %2zu %s  %s: %s\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].first.c_str(), o.detail.c_str());
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
