#include <gtest/gtest.h>

#include <random>

#include "meshparse/align.hpp"
#include "meshparse/synth.hpp"

using namespace meshparse;

namespace {

Mesh gaussian_cloud(Vec3d sigma, std::uint64_t seed, std::size_t n = 5000) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    Mesh m;
    for (std::size_t i = 0; i < n; ++i)
        m.vertices.push_back(Vec3d{g(rng) * sigma.x, g(rng) * sigma.y, g(rng) * sigma.z}.cast<float>());
    return m;
}

void expect_orthonormal(const Mat3& r) {
    const Mat3 p = r * r.transposed();
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) EXPECT_NEAR(p(i, j), i == j ? 1.0 : 0.0, 1e-12);
    EXPECT_NEAR(r.determinant(), 1.0, 1e-12);
}

const GeneratedHumanoid& humanoid() {
    static const GeneratedHumanoid h = build_humanoid(SyntheticHumanoid::from_seed(0, 120));
    return h;
}

const KeypointOracle& oracle_for_humanoid() {
    static const KeypointOracle o(humanoid().triangle_keypoint, humanoid().mesh, canonical_front_view());
    return o;
}

}  // namespace

TEST(Pca, AlreadyVertical) {
    const auto a = align_pca(gaussian_cloud({1, 10, 1}, 1));
    EXPECT_NEAR(std::abs(a.principal_axis.y), 1.0, 1e-3);
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(a.rotation(i, i), 1.0, 1e-3);
    expect_orthonormal(a.rotation);
}

TEST(Pca, StretchedAlongXEndsUpAlongY) {
    const auto a = align_pca(gaussian_cloud({10, 1, 1}, 2));
    const Vec3d mapped = a.rotation * a.principal_axis;
    EXPECT_NEAR(mapped.y, 1.0, 1e-12);
    const auto again = align_pca(a.mesh);
    EXPECT_NEAR(std::abs(again.principal_axis.y), 1.0, 1e-6);
    expect_orthonormal(a.rotation);
    const Mat3 twice = a.rotation * a.rotation;
    EXPECT_GT(std::abs(twice(0, 0) - 1.0), 1e-3);
}

TEST(Pca, MeanRemoved) {
    auto m = gaussian_cloud({3, 1, 2}, 3);
    for (auto& v : m.vertices) v += Vec3f{100, -50, 7};
    const auto a = align_pca(m);
    Vec3d mean{};
    for (const auto& v : a.mesh.vertices) mean += v.cast<double>();
    mean *= 1.0 / double(a.mesh.vertices.size());
    EXPECT_NEAR(norm(mean), 0.0, 1e-3);
}

TEST(Pca, DegenerateCovariance) {
    Mesh m;
    for (int i = 0; i < 50; ++i) m.vertices.push_back({float(i), 2.0f * i, 0});
    EXPECT_THROW(align_pca(m), AlignmentError);
}

TEST(Rules, PriorityAndDirections) {
    KeypointSet kp;
    auto put = [&](Kp k, double x, double y, double c) { kp[k] = {x, y, c}; };
    for (Kp k : {Kp::nose, Kp::left_eye, Kp::right_eye, Kp::left_ear, Kp::right_ear}) put(k, 256, 100, 1.0);
    put(Kp::left_shoulder, 280, 200, 1);
    put(Kp::right_shoulder, 230, 200, 1);
    put(Kp::left_hip, 270, 330, 1);
    put(Kp::right_hip, 240, 330, 1);
    EXPECT_FALSE(decide_rotation(kp).has_value());

    auto upside = kp;
    upside[Kp::left_hip].y = upside[Kp::right_hip].y = 120;
    auto r = decide_rotation(upside);
    ASSERT_TRUE(r);
    EXPECT_EQ(r->axis, 'z');
    EXPECT_DOUBLE_EQ(r->angle, M_PI);

    auto side = kp;
    side[Kp::left_hip].x = side[Kp::right_hip].x = 100;
    side[Kp::left_hip].y = side[Kp::right_hip].y = 200;
    side[Kp::nose].confidence = 0;  // vertical rule outranks depth
    r = decide_rotation(side);
    ASSERT_TRUE(r);
    EXPECT_EQ(r->axis, 'z');
    EXPECT_DOUBLE_EQ(std::abs(r->angle), M_PI / 2);

    auto rear = kp;
    rear[Kp::nose].confidence = 0.1;
    r = decide_rotation(rear);
    ASSERT_TRUE(r);
    EXPECT_EQ(r->axis, 'y');
    EXPECT_DOUBLE_EQ(r->angle, M_PI);

    auto lean = kp;
    lean[Kp::left_shoulder].confidence = 0.6;
    r = decide_rotation(lean);
    ASSERT_TRUE(r);
    EXPECT_EQ(r->axis, 'y');
    EXPECT_DOUBLE_EQ(r->angle, -M_PI / 4);
    lean[Kp::left_shoulder].confidence = 0.8;
    EXPECT_DOUBLE_EQ(decide_rotation(lean)->angle, -M_PI / 8);

    auto eyes = kp;
    eyes[Kp::nose].confidence = 0.7;
    r = decide_rotation(eyes);
    ASSERT_TRUE(r);
    EXPECT_EQ(r->axis, 'x');
}

TEST(Orientation, CanonicalNeedsNoRotation) {
    const auto res = correct_orientation(humanoid().mesh, oracle_for_humanoid(), default_renderer());
    EXPECT_TRUE(res.trace.empty());
    EXPECT_EQ(res.estimator_calls, 1);
    EXPECT_TRUE(res.converged);
}

TEST(Orientation, RearFacingTurnsOnceAboutY) {
    const auto turned = rotate_mesh(humanoid().mesh, axis_angle({0, 1, 0}, M_PI));
    const auto first = oracle_for_humanoid()(rasterize(turned, canonical_front_view()));
    EXPECT_LT(first[Kp::nose].confidence, 0.05);
    const auto res = correct_orientation(turned, oracle_for_humanoid(), default_renderer());
    ASSERT_EQ(res.trace.size(), 1u);
    EXPECT_EQ(res.trace[0].axis, 'y');
    EXPECT_DOUBLE_EQ(std::abs(res.trace[0].angle), M_PI);
    EXPECT_TRUE(res.converged);
}

TEST(Orientation, SideLyingStartsWithQuarterTurnAboutZ) {
    const auto lying = rotate_mesh(humanoid().mesh, axis_angle({0, 0, 1}, M_PI / 2));
    const auto res = correct_orientation(lying, oracle_for_humanoid(), default_renderer());
    ASSERT_FALSE(res.trace.empty());
    EXPECT_EQ(res.trace[0].axis, 'z');
    EXPECT_DOUBLE_EQ(std::abs(res.trace[0].angle), M_PI / 2);
    EXPECT_TRUE(res.converged);
    EXPECT_LE(res.estimator_calls, 10);
}

TEST(Orientation, EstimatorFailureNamesIteration) {
    int calls = 0;
    PoseEstimator flaky = [&](const RenderBuffers& b) -> KeypointSet {
        if (++calls == 2) throw std::runtime_error("model crashed");
        auto kp = oracle_for_humanoid()(b);
        kp[Kp::nose].confidence = 0;
        return kp;
    };
    try {
        correct_orientation(humanoid().mesh, flaky, default_renderer());
        FAIL();
    } catch (const AlignmentError& e) {
        EXPECT_NE(std::string(e.what()).find("iteration 1"), std::string::npos) << e.what();
    }
}

TEST(Orientation, MaxItersBoundsEstimatorCalls) {
    PoseEstimator stubborn = [](const RenderBuffers&) { return KeypointSet{}; };
    OrientationOptions opts;
    opts.max_iters = 3;
    const auto res = correct_orientation(humanoid().mesh, stubborn, default_renderer(), opts);
    EXPECT_EQ(res.estimator_calls, 3);
    EXPECT_EQ(res.trace.size(), 3u);
    EXPECT_FALSE(res.converged);
}

TEST(Keypoints, JsonRoundTripAndErrors) {
    KeypointSet kp;
    kp[Kp::left_ear] = {1.5, 2.5, 0.75};
    const auto back = keypoints_from_json(to_json(kp));
    EXPECT_EQ(back[Kp::left_ear].confidence, 0.75);
    EXPECT_EQ(back[Kp::left_ear].x, 1.5);
    EXPECT_THROW(keypoints_from_json(nlohmann::json::parse(R"([{"name":"tail","x":0,"y":0,"confidence":1}])")), ParseError);
    EXPECT_THROW(keypoints_from_json(nlohmann::json::parse(R"([{"name":"nose","x":0,"y":0,"confidence":2}])")),
                 ValidationError);
}
