#include <gtest/gtest.h>

#include <random>
#include <set>

#include "meshparse/fps.hpp"
#include "meshparse/kdtree.hpp"
#include "meshparse/random.hpp"
#include "oracles.hpp"

using namespace meshparse;

TEST(FpsExact, SquareCorners) {
    const std::vector<Vec3f> pts{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {1, 1, 0}};
    EXPECT_EQ(fps_exact(pts, 2), (std::vector<std::uint32_t>{0, 3}));
    EXPECT_EQ(fps_exact(pts, 1, 2), (std::vector<std::uint32_t>{2}));
    EXPECT_THROW(fps_exact(pts, 5), ContractError);
}

TEST(FpsExact, KEqualsNReturnsAllInGreedyOrder) {
    std::mt19937_64 rng(2);
    const auto pts = uniform_cloud(60, rng);
    const auto s = fps_exact(pts, pts.size());
    EXPECT_EQ(s, oracle::fps(pts, pts.size()));
    EXPECT_EQ(std::set<std::uint32_t>(s.begin(), s.end()).size(), pts.size());
}

TEST(FpsExact, MatchesRecomputeOracle) {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t n = 2 + rng() % 300;
        const std::size_t k = 1 + rng() % n;
        const auto pts = uniform_cloud(n, rng);
        ASSERT_EQ(fps_exact(pts, k), oracle::fps(pts, k)) << "trial " << trial;
    }
}

TEST(FpsExact, DuplicatePointsTieToLowerIndex) {
    std::vector<Vec3f> pts{{0, 0, 0}, {1, 0, 0}, {1, 0, 0}, {0, 0, 0}, {-1, 0, 0}};
    // (1,0,0) and (-1,0,0) tie at distance 1 from the seed; index 1 wins, then 4.
    EXPECT_EQ(fps_exact(pts, 3), (std::vector<std::uint32_t>{0, 1, 4}));
    EXPECT_EQ(fps_exact(pts, 5), oracle::fps(pts, 5));
}

TEST(FpsWindowed, SingleWindowEqualsExact) {
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t n = 1 + rng() % 1500;
        const std::size_t k = 1 + rng() % n;
        const auto pts = uniform_cloud(n, rng);
        const auto part = partition(pts, {n, 16});
        ASSERT_EQ(part.window_count(), 1u);
        auto w = fps_windowed(pts, part, build_plan(part, k));
        auto e = fps_exact(pts, k);
        EXPECT_EQ(w, e);
    }
}

TEST(FpsWindowed, CubeCornersPerWindowPairs) {
    std::vector<Vec3f> pts;
    for (int i = 0; i < 8; ++i) pts.push_back({float((i * 5) % 2), float((i * 3 / 2) % 2), float(i / 4)});
    const auto part = partition(pts, {4, 4});
    const auto plan = build_plan(part, 4);
    ASSERT_EQ(plan.per_window_quota, (std::vector<std::size_t>{2, 2}));
    const auto got = fps_windowed(pts, part, plan);
    // Brute force per window: the lowest index, then the window member farthest from it.
    std::vector<std::uint32_t> want;
    for (std::size_t w = 0; w < 2; ++w) {
        const auto win = part.window(w);
        const auto seed = *std::min_element(win.begin(), win.end());
        std::uint32_t far = seed;
        float best = -1;
        for (auto j : win) {
            const float d = oracle::d2f(pts[j], pts[seed]);
            if (d > best || (d == best && j < far)) {
                best = d;
                far = j;
            }
        }
        want.push_back(seed);
        want.push_back(far);
    }
    EXPECT_EQ(got, want);
    // Each picked pair is a diagonal of its face of the cube.
    EXPECT_FLOAT_EQ(oracle::d2f(pts[got[0]], pts[got[1]]), 2.0f);
    EXPECT_FLOAT_EQ(oracle::d2f(pts[got[2]], pts[got[3]]), 2.0f);
}

TEST(FpsWindowed, RejectsBadPlans) {
    std::mt19937_64 rng(8);
    const auto pts = uniform_cloud(10, rng);
    const auto part = partition(pts, {4, 8});
    SamplePlan plan{5, {5, 0, 0}, {}};
    EXPECT_THROW(fps_windowed(pts, part, plan), ContractError);
    EXPECT_THROW(build_plan(part, 11), ContractError);
}

TEST(Plan, RemainderRule) {
    std::mt19937_64 rng(1);
    const auto pts = uniform_cloud(15, rng);
    const auto part = partition(pts, {5, 8});
    EXPECT_EQ(build_plan(part, 10).per_window_quota, (std::vector<std::size_t>{4, 3, 3}));
}

TEST(Plan, WeightedTwoWindows) {
    // Window 0 holds label 1 only, window 1 label 2 only.
    std::vector<Vec3f> pts;
    std::vector<Label> labels;
    for (int i = 0; i < 8; ++i) {
        pts.push_back({0.01f * i, 0, 0});
        labels.push_back(1);
    }
    for (int i = 0; i < 8; ++i) {
        pts.push_back({0.9f + 0.01f * i, 0, 0});
        labels.push_back(2);
    }
    const auto part = partition(pts, {8, 16});
    for (std::size_t w = 0; w < 2; ++w)
        for (auto i : part.window(w)) ASSERT_EQ(labels[i], w + 1);
    const auto plan = build_plan(part, 8, labels, {{1, 3.0}, {2, 1.0}});
    EXPECT_EQ(plan.per_window_quota, (std::vector<std::size_t>{6, 2}));
}

TEST(Plan, UnitWeightsAreNeutral) {
    std::mt19937_64 rng(12);
    const auto pts = uniform_cloud(1234, rng);
    std::vector<Label> labels(pts.size());
    for (auto& l : labels) l = static_cast<Label>(rng() % 5);
    const auto part = partition(pts, {100, 10});
    for (std::size_t k : {0u, 1u, 13u, 500u, 1234u})
        EXPECT_EQ(build_plan(part, k, labels, {{0, 1.0}, {1, 1.0}, {4, 1.0}}).per_window_quota,
                  build_plan(part, k).per_window_quota)
            << k;
}

TEST(Plan, CapAtPopulation) {
    std::mt19937_64 rng(3);
    const auto pts = uniform_cloud(11, rng);  // windows of 5, 5, 1
    const auto part = partition(pts, {5, 8});
    const auto plan = build_plan(part, 11);
    EXPECT_EQ(plan.per_window_quota, (std::vector<std::size_t>{5, 5, 1}));
    std::vector<Label> labels(11, 0);
    for (auto i : part.window(2)) labels[i] = 1;
    const auto heavy = build_plan(part, 9, labels, {{1, 100.0}});
    EXPECT_EQ(heavy.per_window_quota[2], 1u);
    EXPECT_EQ(heavy.per_window_quota[0] + heavy.per_window_quota[1], 8u);
    EXPECT_THROW(build_plan(part, 5, labels, {{1, 0.0}}), ContractError);
}

TEST(KdTree, MatchesBruteForce) {
    std::mt19937_64 rng(31);
    auto pts = uniform_cloud(3000, rng);
    for (int i = 0; i < 200; ++i) pts.push_back(pts[rng() % 3000]);  // duplicates
    const KdTree tree(pts);
    for (int q = 0; q < 200; ++q) {
        const Vec3f query = q % 2 ? pts[rng() % pts.size()] : uniform_cloud(1, rng)[0];
        const std::size_t k = 1 + rng() % 40;
        const auto got = tree.knn(query, k);
        const auto want = oracle::knn(pts, query, k);
        ASSERT_EQ(got.size(), want.size());
        for (std::size_t i = 0; i < got.size(); ++i) {
            ASSERT_EQ(got[i].index, want[i].second) << "query " << q << " rank " << i;
            ASSERT_EQ(got[i].distance2, want[i].first);
        }
    }
}

TEST(KdTree, Subset) {
    std::mt19937_64 rng(32);
    const auto pts = uniform_cloud(500, rng);
    std::vector<std::uint32_t> sub;
    std::vector<Vec3f> sub_pts;
    for (std::uint32_t i = 0; i < 500; i += 3) {
        sub.push_back(i);
        sub_pts.push_back(pts[i]);
    }
    const KdTree tree(pts, sub);
    for (int q = 0; q < 50; ++q) {
        const auto query = uniform_cloud(1, rng)[0];
        EXPECT_EQ(tree.nearest(query).index, sub[oracle::knn(sub_pts, query, 1)[0].second]);
    }
}

TEST(CoveringRadius, MatchesBruteForce) {
    std::mt19937_64 rng(33);
    const auto pts = uniform_cloud(800, rng);
    const auto s = fps_exact(pts, 40);
    EXPECT_DOUBLE_EQ(covering_radius(pts, s), oracle::covering_radius(pts, s));
}
