#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "meshparse/error.hpp"
#include "meshparse/geometry.hpp"
#include "meshparse/render.hpp"
#include "meshparse/types.hpp"

namespace meshparse {

// COCO keypoint order.
enum class Kp : int {
    nose, left_eye, right_eye, left_ear, right_ear, left_shoulder, right_shoulder, left_elbow, right_elbow,
    left_wrist, right_wrist, left_hip, right_hip, left_knee, right_knee, left_ankle, right_ankle
};

inline constexpr std::size_t kKeypointCount = 17;

inline constexpr std::array<std::string_view, kKeypointCount> kKeypointNames{
    "nose", "left_eye", "right_eye", "left_ear", "right_ear", "left_shoulder", "right_shoulder",
    "left_elbow", "right_elbow", "left_wrist", "right_wrist", "left_hip", "right_hip",
    "left_knee", "right_knee", "left_ankle", "right_ankle"};

struct Keypoint {
    double x = 0;  // pixels, +x right
    double y = 0;  // pixels, +y down
    double confidence = 0;
};

// All 17 keypoints; undetected ones carry confidence 0.
struct KeypointSet {
    std::array<Keypoint, kKeypointCount> points{};

    Keypoint& operator[](Kp k) { return points[static_cast<std::size_t>(k)]; }
    const Keypoint& operator[](Kp k) const { return points[static_cast<std::size_t>(k)]; }
};

inline std::optional<Kp> keypoint_from_name(std::string_view name) {
    for (std::size_t i = 0; i < kKeypointCount; ++i)
        if (kKeypointNames[i] == name) return static_cast<Kp>(i);
    return std::nullopt;
}

// Interchange format: [{"name": str, "x": px, "y": px, "confidence": float}, ...].
// Keypoints missing from the array get confidence 0.
inline KeypointSet keypoints_from_json(const nlohmann::json& j) {
    if (!j.is_array()) throw ParseError("keypoint JSON must be an array");
    KeypointSet set;
    for (const auto& e : j) {
        for (const char* key : {"name", "x", "y", "confidence"})
            if (!e.contains(key)) throw ParseError(std::string("keypoint entry is missing \"") + key + "\"");
        const auto name = e.at("name").get<std::string>();
        const auto kp = keypoint_from_name(name);
        if (!kp) throw ParseError("unknown keypoint name \"" + name + "\"");
        Keypoint k{e.at("x").get<double>(), e.at("y").get<double>(), e.at("confidence").get<double>()};
        if (!(k.confidence >= 0 && k.confidence <= 1))
            throw ValidationError("keypoint \"" + name + "\" confidence outside [0,1]");
        set[*kp] = k;
    }
    return set;
}

inline nlohmann::json to_json(const KeypointSet& set) {
    nlohmann::json j = nlohmann::json::array();
    for (std::size_t i = 0; i < kKeypointCount; ++i) {
        const auto& k = set.points[i];
        j.push_back({{"name", kKeypointNames[i]}, {"x", k.x}, {"y", k.y}, {"confidence", k.confidence}});
    }
    return j;
}

// A rendered image in, keypoints out. Must be deterministic.
using PoseEstimator = std::function<KeypointSet(const RenderBuffers&)>;
using Renderer = std::function<RenderBuffers(const Mesh&, const ViewSpec&)>;

inline Renderer default_renderer() {
    return [](const Mesh& m, const ViewSpec& v) { return rasterize(m, v); };
}

inline Mesh rotate_mesh(const Mesh& mesh, const Mat3& r) {
    Mesh out = mesh;
    for (auto& v : out.vertices) v = (r * v.cast<double>()).cast<float>();
    return out;
}

// ---------------------------------------------------------------------------
// PCA alignment

struct PcaAlignment {
    Mesh mesh;           // centered and rotated
    Mat3 rotation;       // applied after centering
    Vec3d mean;          // subtracted before rotating
    std::array<double, 3> eigenvalues{};  // descending
    Vec3d principal_axis;  // e1, before rotation
};

// Centers the vertices, takes the eigenvector e1 of the covariance with the
// largest eigenvalue (sign chosen so e1.y >= 0) and rotates it onto +y with
// Rodrigues' formula.
inline PcaAlignment align_pca(const Mesh& mesh) {
    require(mesh.vertices.size() >= 3, "align_pca: need at least 3 vertices");
    Vec3d mean{};
    for (const auto& v : mesh.vertices) mean += v.cast<double>();
    mean *= 1.0 / static_cast<double>(mesh.vertices.size());

    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    for (const auto& v : mesh.vertices) {
        const Vec3d d = v.cast<double>() - mean;
        const Eigen::Vector3d e(d.x, d.y, d.z);
        cov += e * e.transpose();
    }
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(cov);
    if (solver.info() != Eigen::Success) throw AlignmentError("align_pca: eigen decomposition failed");
    // Eigen sorts ascending; the covariance is PSD so magnitude order is the same.
    const auto& values = solver.eigenvalues();
    const double l1 = values(2), l2 = values(1);
    if (!(l1 > 0) || l2 <= 1e-12 * l1)
        throw AlignmentError("align_pca: degenerate vertex covariance (rank < 2)");

    Eigen::Vector3d e1 = solver.eigenvectors().col(2);
    if (e1.y() < 0) e1 = -e1;
    const Vec3d axis{e1.x(), e1.y(), e1.z()};

    PcaAlignment out;
    out.mean = mean;
    out.eigenvalues = {values(2), values(1), values(0)};
    out.principal_axis = axis;
    out.rotation = rotation_between(axis, Vec3d{0, 1, 0});
    out.mesh = mesh;
    for (auto& v : out.mesh.vertices) v = (out.rotation * (v.cast<double>() - mean)).cast<float>();
    return out;
}

// ---------------------------------------------------------------------------
// Keypoint-driven orientation correction

struct OrientationThresholds {
    double nose = 0.3;              // below: subject faces away
    double shoulder_asymmetry = 0.15;  // lateral rule; twice this selects the larger step
    double eye_differential = 0.15;
    double ear_gate = 0.4;          // mean ear confidence required to call the pose aligned
    double min_joint_confidence = 0.1;  // shoulders/hips below this are ignored by the vertical rule
};

struct AppliedRotation {
    char axis = 'y';
    double angle = 0;  // radians, right-handed about +axis
    std::string rule;
    Mat3 matrix;
};

inline AppliedRotation make_rotation(char axis, double angle, std::string rule) {
    const Vec3d a = axis == 'x' ? Vec3d{1, 0, 0} : axis == 'y' ? Vec3d{0, 1, 0} : Vec3d{0, 0, 1};
    return {axis, angle, std::move(rule), axis_angle(a, angle)};
}

// Evaluates the correction rules in priority order against keypoints from the
// canonical front view (image x = world +x, image y = world -y) and returns the
// first rotation that fires.
//   1. vertical: torso (hips -> shoulders) more horizontal than vertical turns
//      by +-pi/2 about z; shoulders below hips turn by pi about z.
//   2. depth: nose confidence below threshold turns by pi about y.
//   3. lateral: shoulder confidence asymmetry turns by pi/8 (pi/4 beyond twice
//      the threshold) about y, bringing the weaker shoulder toward the camera.
//   4. lean: mean eye confidence minus nose confidence beyond threshold turns by
//      pi/8 about x, positive when the eyes are the stronger cue.
inline std::optional<AppliedRotation> decide_rotation(const KeypointSet& kp, const OrientationThresholds& t = {}) {
    auto mean_position = [&](Kp a, Kp b) -> std::optional<std::array<double, 2>> {
        double x = 0, y = 0;
        int n = 0;
        for (Kp k : {a, b})
            if (kp[k].confidence >= t.min_joint_confidence) {
                x += kp[k].x;
                y += kp[k].y;
                ++n;
            }
        if (n == 0) return std::nullopt;
        return std::array<double, 2>{x / n, y / n};
    };
    const auto shoulders = mean_position(Kp::left_shoulder, Kp::right_shoulder);
    const auto hips = mean_position(Kp::left_hip, Kp::right_hip);
    if (shoulders && hips) {
        const double du = (*shoulders)[0] - (*hips)[0];
        const double dv = (*shoulders)[1] - (*hips)[1];
        if (std::abs(du) > std::abs(dv))
            // Torso points along image +x (world +x): +pi/2 about z maps +x to +y.
            return make_rotation('z', du > 0 ? M_PI / 2 : -M_PI / 2, "horizontal");
        if (dv > 0) return make_rotation('z', M_PI, "upside-down");
    }

    if (kp[Kp::nose].confidence < t.nose) return make_rotation('y', M_PI, "rear-facing");

    const double asym = kp[Kp::left_shoulder].confidence - kp[Kp::right_shoulder].confidence;
    if (std::abs(asym) > t.shoulder_asymmetry) {
        const double step = std::abs(asym) > 2 * t.shoulder_asymmetry ? M_PI / 4 : M_PI / 8;
        // The subject's left side is at world +x. A negative turn about y brings
        // the +x side toward a camera on +z.
        return make_rotation('y', asym < 0 ? -step : step, "lateral-lean");
    }

    const double eyes = 0.5 * (kp[Kp::left_eye].confidence + kp[Kp::right_eye].confidence);
    const double diff = eyes - kp[Kp::nose].confidence;
    if (std::abs(diff) > t.eye_differential) return make_rotation('x', diff > 0 ? M_PI / 8 : -M_PI / 8, "forward-lean");
    return std::nullopt;
}

inline double mean_ear_confidence(const KeypointSet& kp) {
    return 0.5 * (kp[Kp::left_ear].confidence + kp[Kp::right_ear].confidence);
}

struct OrientationOptions {
    int max_iters = 10;
    ViewSpec view{0, 0, 512, 512, 40, 3.0};
    OrientationThresholds thresholds;
};

struct OrientationResult {
    Mesh mesh;
    std::vector<AppliedRotation> trace;
    int estimator_calls = 0;
    bool converged = false;  // no rule fired and the ear gate passed
    KeypointSet last_keypoints;

    // Product of the trace, in application order.
    Mat3 total_rotation() const {
        Mat3 r;
        for (const auto& a : trace) r = a.matrix * r;
        return r;
    }
};

// Render, estimate, apply the first firing rule, repeat. Stops when no rule
// fires or after max_iters estimator calls.
inline OrientationResult correct_orientation(const Mesh& mesh, const PoseEstimator& estimator, const Renderer& renderer,
                                             const OrientationOptions& opts = {}) {
    require(opts.max_iters >= 1, "correct_orientation: max_iters must be >= 1");
    OrientationResult out;
    out.mesh = mesh;
    for (int iter = 0; iter < opts.max_iters; ++iter) {
        const RenderBuffers buffers = renderer(out.mesh, opts.view);
        try {
            out.last_keypoints = estimator(buffers);
        } catch (const std::exception& e) {
            throw AlignmentError("pose estimator failed at iteration " + std::to_string(iter) + ": " + e.what());
        }
        ++out.estimator_calls;
        const auto rotation = decide_rotation(out.last_keypoints, opts.thresholds);
        if (!rotation) {
            out.converged = mean_ear_confidence(out.last_keypoints) > opts.thresholds.ear_gate;
            break;
        }
        out.mesh = rotate_mesh(out.mesh, rotation->matrix);
        out.trace.push_back(*rotation);
    }
    return out;
}

inline nlohmann::json to_json(const AppliedRotation& r) {
    nlohmann::json m = nlohmann::json::array();
    for (int i = 0; i < 3; ++i) m.push_back({r.matrix(i, 0), r.matrix(i, 1), r.matrix(i, 2)});
    return {{"axis", std::string(1, r.axis)}, {"angle", r.angle}, {"rule", r.rule}, {"matrix", m}};
}

}  // namespace meshparse
