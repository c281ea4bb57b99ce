#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "meshparse/align.hpp"
#include "meshparse/error.hpp"
#include "meshparse/geometry.hpp"
#include "meshparse/label_space.hpp"
#include "meshparse/random.hpp"
#include "meshparse/render.hpp"
#include "meshparse/types.hpp"

namespace meshparse {

// Labels of label_spaces::synthetic().
namespace synth_label {
inline constexpr Label hair = 1, face = 2, torso = 3, left_arm = 4, right_arm = 5, left_hand = 6, right_hand = 7,
                       left_leg = 8, right_leg = 9, left_foot = 10, right_foot = 11;
}

struct PartSpec {
    enum class Primitive { sphere, capsule, box };
    std::string name;
    Primitive primitive = Primitive::sphere;
    Vec3d a;          // sphere/box center, capsule start
    Vec3d b;          // capsule end; box full size
    double radius = 0;  // sphere/capsule
    Label label = 0;
};

// Articulated primitive humanoid standing on y = 0, facing +z; the subject's
// left side is at +x. Heights in meters.
struct SyntheticHumanoid {
    std::vector<PartSpec> parts;
    int tessellation = 300;  // target edges per 1.8 m of body height

    static SyntheticHumanoid from_seed(std::uint64_t seed, int tessellation = 300);
};

// Keypoint marker: the triangles within `radius` of `location` whose outward
// normal lies within `half_angle` of `facing`.
struct KeypointMarker {
    Vec3d location;
    double radius = 0.05;
    Vec3d facing{0, 0, 1};
    double half_angle_deg = 60;
};

struct GeneratedHumanoid {
    Mesh mesh;
    LabeledCloud ground_truth;
    std::vector<Label> triangle_labels;
    std::vector<std::int8_t> triangle_keypoint;  // -1 or a Kp index
    std::array<KeypointMarker, kKeypointCount> markers;
};

namespace detail {

struct MeshBuilder {
    Mesh mesh;
    std::vector<Label> vertex_labels;

    std::uint32_t add(const Vec3d& p, Label l) {
        mesh.vertices.push_back(p.cast<float>());
        vertex_labels.push_back(l);
        return static_cast<std::uint32_t>(mesh.vertices.size() - 1);
    }

    // Surface of revolution around a -> b. `profile` runs from pole to pole as
    // (axial offset from a, radius); both ends must have radius 0.
    void lathe(const Vec3d& a, const Vec3d& b, const std::vector<std::array<double, 2>>& profile, int segments, Label label) {
        const Vec3d d = normalize(b - a);
        const Vec3d helper = std::abs(d.y) < 0.9 ? Vec3d{0, 1, 0} : Vec3d{1, 0, 0};
        const Vec3d u = normalize(cross(helper, d));
        const Vec3d v = cross(d, u);
        const std::size_t rings = profile.size();
        std::vector<std::vector<std::uint32_t>> ring_ids(rings);
        for (std::size_t i = 0; i < rings; ++i) {
            const auto [s, r] = profile[i];
            if (i == 0 || i + 1 == rings) {
                ring_ids[i].push_back(add(a + d * s, label));
                continue;
            }
            for (int j = 0; j < segments; ++j) {
                const double th = 2.0 * M_PI * j / segments;
                ring_ids[i].push_back(add(a + d * s + (u * std::cos(th) + v * std::sin(th)) * r, label));
            }
        }
        auto at = [&](std::size_t i, int j) {
            const auto& ring = ring_ids[i];
            return ring.size() == 1 ? ring[0] : ring[static_cast<std::size_t>(j % segments)];
        };
        for (std::size_t i = 0; i + 1 < rings; ++i)
            for (int j = 0; j < segments; ++j) {
                const auto p00 = at(i, j), p01 = at(i, j + 1), p10 = at(i + 1, j), p11 = at(i + 1, j + 1);
                if (i == 0) {
                    mesh.triangles.push_back({p00, p11, p10});
                } else if (i + 2 == rings) {
                    mesh.triangles.push_back({p00, p01, p11});
                } else {
                    mesh.triangles.push_back({p00, p01, p11});
                    mesh.triangles.push_back({p00, p11, p10});
                }
            }
    }

    void sphere(const Vec3d& c, double r, double edge, Label label) {
        const int rings = std::max(4, static_cast<int>(std::ceil(M_PI * r / edge)));
        const int segments = std::max(6, static_cast<int>(std::ceil(2 * M_PI * r / edge)));
        std::vector<std::array<double, 2>> profile;
        for (int i = 0; i <= rings; ++i) {
            const double phi = M_PI * i / rings;
            profile.push_back({r - r * std::cos(phi), r * std::sin(phi)});
        }
        profile.front()[1] = 0;
        profile.back()[1] = 0;
        lathe(c - Vec3d{0, r, 0}, c + Vec3d{0, r, 0}, profile, segments, label);
    }

    void capsule(const Vec3d& a, const Vec3d& b, double r, double edge, Label label) {
        const double len = norm(b - a);
        const Vec3d d = normalize(b - a);
        const int cap_rings = std::max(3, static_cast<int>(std::ceil(0.5 * M_PI * r / edge)));
        const int body_rings = std::max(1, static_cast<int>(std::ceil(len / edge)));
        const int segments = std::max(6, static_cast<int>(std::ceil(2 * M_PI * r / edge)));
        std::vector<std::array<double, 2>> profile;
        for (int i = 0; i <= cap_rings; ++i) {
            const double phi = 0.5 * M_PI * i / cap_rings;
            profile.push_back({r - r * std::cos(phi), r * std::sin(phi)});
        }
        for (int i = 1; i < body_rings; ++i) profile.push_back({r + len * i / body_rings, r});
        for (int i = 0; i <= cap_rings; ++i) {
            const double phi = 0.5 * M_PI * i / cap_rings;
            profile.push_back({r + len + r * std::sin(phi), r * std::cos(phi)});
        }
        profile.front()[1] = 0;
        profile.back()[1] = 0;
        lathe(a - d * r, b + d * r, profile, segments, label);
    }

    void box(const Vec3d& center, const Vec3d& size, double edge, Label label) {
        const Vec3d lo = center - size * 0.5, hi = center + size * 0.5;
        struct Face {
            Vec3d origin, a, b;
        };
        const Vec3d X{size.x, 0, 0}, Y{0, size.y, 0}, Z{0, 0, size.z};
        const Face faces[6] = {
            {{hi.x, lo.y, lo.z}, Y, Z}, {lo, Z, Y},  // +x, -x
            {{lo.x, hi.y, lo.z}, Z, X}, {lo, X, Z},  // +y, -y
            {{lo.x, lo.y, hi.z}, X, Y}, {lo, Y, X},  // +z, -z
        };
        for (const auto& f : faces) {
            const int na = std::max(1, static_cast<int>(std::ceil(norm(f.a) / edge)));
            const int nb = std::max(1, static_cast<int>(std::ceil(norm(f.b) / edge)));
            std::vector<std::uint32_t> ids;
            for (int j = 0; j <= nb; ++j)
                for (int i = 0; i <= na; ++i) ids.push_back(add(f.origin + f.a * (double(i) / na) + f.b * (double(j) / nb), label));
            auto at = [&](int i, int j) { return ids[static_cast<std::size_t>(j * (na + 1) + i)]; };
            for (int j = 0; j < nb; ++j)
                for (int i = 0; i < na; ++i) {
                    mesh.triangles.push_back({at(i, j), at(i + 1, j), at(i + 1, j + 1)});
                    mesh.triangles.push_back({at(i, j), at(i + 1, j + 1), at(i, j + 1)});
                }
        }
    }
};

inline Vec3d triangle_centroid(const Mesh& m, const Triangle& t) {
    return (m.vertices[t[0]].cast<double>() + m.vertices[t[1]].cast<double>() + m.vertices[t[2]].cast<double>()) *
           (1.0 / 3.0);
}

inline Vec3d triangle_normal(const Mesh& m, const Triangle& t) {
    const Vec3d a = m.vertices[t[0]].cast<double>();
    return normalize(cross(m.vertices[t[1]].cast<double>() - a, m.vertices[t[2]].cast<double>() - a));
}

}  // namespace detail

inline SyntheticHumanoid SyntheticHumanoid::from_seed(std::uint64_t seed, int tessellation) {
    std::mt19937_64 rng(seed);
    // Proportions vary by up to +-4% per seed.
    auto jitter = [&] { return 1.0 + 0.08 * (unit_uniform(rng) - 0.5); };
    const double height = 1.0 * jitter(), width = jitter(), limb = jitter();

    auto P = [&](double x, double y, double z) { return Vec3d{x * width, y * height, z}; };
    using Prim = PartSpec::Primitive;
    namespace L = synth_label;
    SyntheticHumanoid h;
    h.tessellation = tessellation;
    h.parts = {
        {"head", Prim::sphere, P(0, 1.68, 0), {}, 0.11, L::face},
        {"neck", Prim::capsule, P(0, 1.50, 0), P(0, 1.58, 0), 0.05, L::face},
        {"nose", Prim::sphere, P(0, 1.665, 0.115), {}, 0.025, L::face},
        {"left ear", Prim::sphere, P(0.11, 1.68, 0.01), {}, 0.03, L::face},
        {"right ear", Prim::sphere, P(-0.11, 1.68, 0.01), {}, 0.03, L::face},
        {"torso", Prim::box, P(0, 1.25, 0), Vec3d{0.36 * width, 0.55 * height, 0.20}, 0, L::torso},
        {"left arm", Prim::capsule, P(0.235, 1.46, 0), P(0.27, 0.94, 0), 0.045 * limb, L::left_arm},
        {"right arm", Prim::capsule, P(-0.235, 1.46, 0), P(-0.27, 0.94, 0), 0.045 * limb, L::right_arm},
        {"left hand", Prim::sphere, P(0.28, 0.86, 0), {}, 0.05 * limb, L::left_hand},
        {"right hand", Prim::sphere, P(-0.28, 0.86, 0), {}, 0.05 * limb, L::right_hand},
        {"left leg", Prim::capsule, P(0.09, 0.96, 0), P(0.09, 0.16, 0), 0.065 * limb, L::left_leg},
        {"right leg", Prim::capsule, P(-0.09, 0.96, 0), P(-0.09, 0.16, 0), 0.065 * limb, L::right_leg},
        {"left foot", Prim::box, P(0.09, 0.04, 0.05), Vec3d{0.09, 0.08, 0.24}, 0, L::left_foot},
        {"right foot", Prim::box, P(-0.09, 0.04, 0.05), Vec3d{0.09, 0.08, 0.24}, 0, L::right_foot},
    };
    return h;
}

namespace detail {

// Hair covers the crown and the back of the head sphere.
inline bool is_hair(const Vec3d& p, const Vec3d& head_center, double r) {
    const Vec3d d = p - head_center;
    return d.y > 0.35 * r || (d.z < -0.25 * r && d.y > -0.45 * r);
}

inline std::array<KeypointMarker, kKeypointCount> humanoid_markers(const SyntheticHumanoid& h) {
    auto part = [&](const std::string& name) -> const PartSpec& {
        for (const auto& p : h.parts)
            if (p.name == name) return p;
        throw ContractError("humanoid has no part " + name);
    };
    const auto& head = part("head");
    const auto& nose = part("nose");
    const auto& lear = part("left ear");
    const auto& larm = part("left arm");
    const auto& lleg = part("left leg");
    auto mirror = [](Vec3d v) { return Vec3d{-v.x, v.y, v.z}; };
    auto mirror_marker = [&](KeypointMarker m) {
        m.location = mirror(m.location);
        m.facing = mirror(m.facing);
        return m;
    };
    const double deg = M_PI / 180.0;

    std::array<KeypointMarker, kKeypointCount> m{};
    m[static_cast<std::size_t>(Kp::nose)] = {nose.a + Vec3d{0, 0, nose.radius}, 0.03, {0, 0, 1}, 60};
    {
        const Vec3d eye_dir = normalize(Vec3d{0.38, 0.25, 0.89});
        m[static_cast<std::size_t>(Kp::left_eye)] = {head.a + eye_dir * head.radius, 0.03, eye_dir, 50};
    }
    m[static_cast<std::size_t>(Kp::left_ear)] = {lear.a, 0.04, {std::sin(60 * deg), 0, std::cos(60 * deg)}, 45};
    const Vec3d arm_dir = normalize(larm.b - larm.a);
    const double arm_len = norm(larm.b - larm.a);
    auto on_arm = [&](double t) { return larm.a + arm_dir * (t * arm_len); };
    const Vec3d lateral{std::sin(15 * deg), 0, std::cos(15 * deg)};
    m[static_cast<std::size_t>(Kp::left_shoulder)] = {on_arm(0) + Vec3d{0, 0, 0.0}, 0.08, lateral, 45};
    m[static_cast<std::size_t>(Kp::left_elbow)] = {on_arm(0.5) + Vec3d{0, 0, larm.radius}, 0.06, {0, 0, 1}, 60};
    m[static_cast<std::size_t>(Kp::left_wrist)] = {on_arm(1.0) + Vec3d{0, 0, larm.radius}, 0.06, {0, 0, 1}, 60};
    const Vec3d leg_dir = normalize(lleg.b - lleg.a);
    const double leg_len = norm(lleg.b - lleg.a);
    auto on_leg = [&](double t) { return lleg.a + leg_dir * (t * leg_len) + Vec3d{0, 0, lleg.radius}; };
    m[static_cast<std::size_t>(Kp::left_hip)] = {on_leg(0.02), 0.08, {0, 0, 1}, 60};
    m[static_cast<std::size_t>(Kp::left_knee)] = {on_leg(0.5), 0.07, {0, 0, 1}, 60};
    m[static_cast<std::size_t>(Kp::left_ankle)] = {on_leg(1.0), 0.07, {0, 0, 1}, 60};
    for (auto [l, r] : {std::pair{Kp::left_eye, Kp::right_eye}, std::pair{Kp::left_ear, Kp::right_ear},
                        std::pair{Kp::left_shoulder, Kp::right_shoulder}, std::pair{Kp::left_elbow, Kp::right_elbow},
                        std::pair{Kp::left_wrist, Kp::right_wrist}, std::pair{Kp::left_hip, Kp::right_hip},
                        std::pair{Kp::left_knee, Kp::right_knee}, std::pair{Kp::left_ankle, Kp::right_ankle}})
        m[static_cast<std::size_t>(r)] = mirror_marker(m[static_cast<std::size_t>(l)]);
    return m;
}

}  // namespace detail

// Tessellates the humanoid. Vertex labels come from each vertex's part (head
// vertices split into hair and face by position); triangle labels use the
// same rule at the triangle centroid.
inline GeneratedHumanoid build_humanoid(const SyntheticHumanoid& h) {
    require(h.tessellation >= 20, "humanoid tessellation must be >= 20");
    const double edge = 1.8 / h.tessellation;
    detail::MeshBuilder builder;
    std::vector<std::pair<std::size_t, const PartSpec*>> first_triangle;
    const PartSpec* head = nullptr;
    for (const auto& p : h.parts) {
        first_triangle.push_back({builder.mesh.triangles.size(), &p});
        switch (p.primitive) {
            case PartSpec::Primitive::sphere: builder.sphere(p.a, p.radius, edge, p.label); break;
            case PartSpec::Primitive::capsule: builder.capsule(p.a, p.b, p.radius, edge, p.label); break;
            case PartSpec::Primitive::box: builder.box(p.a, p.b, edge, p.label); break;
        }
        if (p.name == "head") head = &p;
    }
    GeneratedHumanoid g;
    g.mesh = std::move(builder.mesh);
    auto labels = std::move(builder.vertex_labels);
    g.triangle_labels.resize(g.mesh.triangles.size());
    for (std::size_t k = 0; k < first_triangle.size(); ++k) {
        const std::size_t end = k + 1 < first_triangle.size() ? first_triangle[k + 1].first : g.mesh.triangles.size();
        const PartSpec* part = first_triangle[k].second;
        for (std::size_t t = first_triangle[k].first; t < end; ++t) {
            Label l = part->label;
            if (part == head && detail::is_hair(detail::triangle_centroid(g.mesh, g.mesh.triangles[t]), head->a, head->radius))
                l = synth_label::hair;
            g.triangle_labels[t] = l;
            if (part == head)
                for (auto v : g.mesh.triangles[t])
                    if (detail::is_hair(g.mesh.vertices[v].cast<double>(), head->a, head->radius)) labels[v] = synth_label::hair;
        }
    }
    g.ground_truth = {g.mesh.vertices, std::move(labels), std::make_shared<const LabelSpace>(label_spaces::synthetic())};

    g.markers = detail::humanoid_markers(h);
    g.triangle_keypoint.assign(g.mesh.triangles.size(), -1);
    for (std::size_t t = 0; t < g.mesh.triangles.size(); ++t) {
        const Vec3d c = detail::triangle_centroid(g.mesh, g.mesh.triangles[t]);
        const Vec3d n = detail::triangle_normal(g.mesh, g.mesh.triangles[t]);
        for (std::size_t k = 0; k < kKeypointCount; ++k) {
            const auto& m = g.markers[k];
            if (distance2(c, m.location) <= m.radius * m.radius &&
                dot(n, normalize(m.facing)) >= std::cos(m.half_angle_deg * M_PI / 180.0)) {
                g.triangle_keypoint[t] = static_cast<std::int8_t>(k);
                break;
            }
        }
    }
    return g;
}

// Label image of a view: each covered pixel carries the label of its triangle.
inline LabelImage oracle_label_image(const RenderBuffers& buffers, const std::vector<Label>& triangle_labels) {
    LabelImage img(buffers.width(), buffers.height(), 0);
    for (std::size_t i = 0; i < img.data.size(); ++i) {
        const auto id = buffers.triangle_id.data[i];
        if (id >= 0) img.data[i] = static_cast<std::uint8_t>(triangle_labels.at(static_cast<std::size_t>(id)));
    }
    return img;
}

// Paints round blobs of random wrong labels over covered pixels until roughly
// `fraction` of them is affected. Background stays background.
inline void add_label_noise(LabelImage& img, double fraction, std::size_t label_count, std::mt19937_64& rng,
                            int blob_radius = 4) {
    if (fraction <= 0 || label_count < 3) return;
    std::vector<std::size_t> covered;
    for (std::size_t i = 0; i < img.data.size(); ++i)
        if (img.data[i] != 0) covered.push_back(i);
    if (covered.empty()) return;
    const double blob_area = M_PI * blob_radius * blob_radius;
    const auto blobs = static_cast<std::size_t>(std::ceil(fraction * covered.size() / blob_area));
    for (std::size_t b = 0; b < blobs; ++b) {
        const std::size_t at = covered[static_cast<std::size_t>(unit_uniform(rng) * covered.size())];
        const int cx = static_cast<int>(at % static_cast<std::size_t>(img.width));
        const int cy = static_cast<int>(at / static_cast<std::size_t>(img.width));
        const auto label = static_cast<std::uint8_t>(1 + static_cast<std::size_t>(unit_uniform(rng) * (label_count - 1)));
        for (int y = std::max(0, cy - blob_radius); y <= std::min(img.height - 1, cy + blob_radius); ++y)
            for (int x = std::max(0, cx - blob_radius); x <= std::min(img.width - 1, cx + blob_radius); ++x)
                if ((x - cx) * (x - cx) + (y - cy) * (y - cy) <= blob_radius * blob_radius && img.at(x, y) != 0)
                    img.at(x, y) = label;
    }
}

// Pose estimator for generated humanoids. A keypoint's confidence is the
// visible pixel area of its marker relative to the canonical front view
// (capped at 1); its position is the centroid of those pixels.
class KeypointOracle {
public:
    KeypointOracle() = default;

    KeypointOracle(std::vector<std::int8_t> triangle_keypoint, const Mesh& canonical, const ViewSpec& reference_view)
        : triangle_keypoint_(std::move(triangle_keypoint)) {
        const auto buffers = rasterize(canonical, reference_view);
        reference_pixels_ = count(buffers).first;
        reference_area_ = static_cast<double>(reference_view.width) * reference_view.height;
    }

    KeypointOracle(std::vector<std::int8_t> triangle_keypoint, std::array<double, kKeypointCount> reference_pixels,
                   double reference_area)
        : triangle_keypoint_(std::move(triangle_keypoint)), reference_pixels_(reference_pixels), reference_area_(reference_area) {}

    KeypointSet operator()(const RenderBuffers& buffers) const {
        const auto [pixels, centroid] = count(buffers);
        const double scale = static_cast<double>(buffers.width()) * buffers.height() / reference_area_;
        KeypointSet set;
        for (std::size_t k = 0; k < kKeypointCount; ++k) {
            const double ref = reference_pixels_[k] * scale;
            auto& kp = set.points[k];
            kp.confidence = ref > 0 ? std::min(1.0, pixels[k] / ref) : 0.0;
            if (pixels[k] > 0) {
                kp.x = centroid[k][0];
                kp.y = centroid[k][1];
            }
        }
        return set;
    }

    const std::vector<std::int8_t>& triangle_keypoint() const { return triangle_keypoint_; }
    const std::array<double, kKeypointCount>& reference_pixels() const { return reference_pixels_; }
    double reference_area() const { return reference_area_; }

private:
    std::pair<std::array<double, kKeypointCount>, std::array<std::array<double, 2>, kKeypointCount>> count(
        const RenderBuffers& buffers) const {
        std::array<double, kKeypointCount> pixels{};
        std::array<std::array<double, 2>, kKeypointCount> centroid{};
        for (int y = 0; y < buffers.height(); ++y)
            for (int x = 0; x < buffers.width(); ++x) {
                const auto id = buffers.triangle_id.at(x, y);
                if (id < 0) continue;
                const auto k = triangle_keypoint_.at(static_cast<std::size_t>(id));
                if (k < 0) continue;
                const auto kk = static_cast<std::size_t>(k);
                pixels[kk] += 1;
                centroid[kk][0] += x + 0.5;
                centroid[kk][1] += y + 0.5;
            }
        for (std::size_t k = 0; k < kKeypointCount; ++k)
            if (pixels[k] > 0) {
                centroid[k][0] /= pixels[k];
                centroid[k][1] /= pixels[k];
            }
        return {pixels, centroid};
    }

    std::vector<std::int8_t> triangle_keypoint_;
    std::array<double, kKeypointCount> reference_pixels_{};
    double reference_area_ = 1;
};

inline nlohmann::json to_json(const KeypointOracle& o) {
    return {{"triangle_keypoint", o.triangle_keypoint()},
            {"reference_pixels", o.reference_pixels()},
            {"reference_area", o.reference_area()}};
}

inline KeypointOracle keypoint_oracle_from_json(const nlohmann::json& j) {
    try {
        return KeypointOracle(j.at("triangle_keypoint").get<std::vector<std::int8_t>>(),
                              j.at("reference_pixels").get<std::array<double, kKeypointCount>>(),
                              j.at("reference_area").get<double>());
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("keypoint oracle: ") + e.what());
    }
}

inline ViewSpec canonical_front_view() { return ViewSpec{0, 0, 512, 512, 40, 3.0}; }

// Everything the end-to-end checks need from one seed.
struct HumanoidBundle {
    GeneratedHumanoid humanoid;
    KeypointOracle oracle;
    std::vector<ViewSpec> views;
    std::vector<LabelImage> label_images;  // per default view
    std::vector<KeypointSet> keypoints;    // per default view
};

struct HumanoidOptions {
    std::uint64_t seed = 0;
    int tessellation = 300;
    int image_size = 1024;
    double label_noise = 0;  // fraction of covered pixels repainted per view
};

inline HumanoidBundle generate_humanoid(const HumanoidOptions& opts = {}) {
    HumanoidBundle b;
    b.humanoid = build_humanoid(SyntheticHumanoid::from_seed(opts.seed, opts.tessellation));
    b.oracle = KeypointOracle(b.humanoid.triangle_keypoint, b.humanoid.mesh, canonical_front_view());
    b.views = default_views(opts.image_size, opts.image_size);
    std::mt19937_64 noise_rng(opts.seed ^ 0x9E3779B97F4A7C15ull);
    for (const auto& v : b.views) {
        const auto buffers = rasterize(b.humanoid.mesh, v);
        auto img = oracle_label_image(buffers, b.humanoid.triangle_labels);
        add_label_noise(img, opts.label_noise, b.humanoid.ground_truth.label_space->size(), noise_rng);
        b.label_images.push_back(std::move(img));
        b.keypoints.push_back(b.oracle(buffers));
    }
    return b;
}

}  // namespace meshparse
