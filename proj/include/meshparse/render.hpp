#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "meshparse/error.hpp"
#include "meshparse/geometry.hpp"
#include "meshparse/parallel.hpp"
#include "meshparse/types.hpp"

namespace meshparse {

struct ViewSpec {
    double azimuth_deg = 0;
    double elevation_deg = 0;
    int width = 1024;
    int height = 1024;
    double fov_deg = 40;  // vertical field of view
    double distance = 3.0;  // camera distance in bounding-sphere radii

    void validate() const {
        require(width >= 1 && height >= 1, "view: image dimensions must be >= 1");
        require(fov_deg > 0 && fov_deg < 180, "view: fov must lie in (0, 180) degrees");
        require(distance > 0, "view: camera distance must be positive");
    }
    friend bool operator==(const ViewSpec&, const ViewSpec&) = default;
};

// Elevations {0, 30, -30} x azimuths {0, 90, 180, 270}, elevation-major.
inline std::vector<ViewSpec> default_views(int width = 1024, int height = 1024, double fov_deg = 40) {
    std::vector<ViewSpec> views;
    for (double elevation : {0.0, 30.0, -30.0})
        for (double azimuth : {0.0, 90.0, 180.0, 270.0}) {
            ViewSpec v;
            v.azimuth_deg = azimuth;
            v.elevation_deg = elevation;
            v.width = width;
            v.height = height;
            v.fov_deg = fov_deg;
            views.push_back(v);
        }
    return views;
}

// Bounding sphere used for framing: vertex centroid and the largest distance
// from it. Both are invariant under rigid motion of the mesh.
struct BoundingSphere {
    Vec3d center;
    double radius = 1;
};

inline BoundingSphere bounding_sphere(const std::vector<Vec3f>& vertices) {
    require(!vertices.empty(), "bounding_sphere: no vertices");
    Vec3d c{};
    for (const auto& v : vertices) c += v.cast<double>();
    c *= 1.0 / static_cast<double>(vertices.size());
    double r2 = 0;
    for (const auto& v : vertices) r2 = std::max(r2, distance2(v.cast<double>(), c));
    return {c, r2 > 0 ? std::sqrt(r2) : 1.0};
}

// Pinhole camera orbiting the bounding sphere center. Camera space: +x right,
// +y up, depth along the viewing direction. Image v grows downward.
struct Camera {
    Vec3d position, right, up, forward;
    double focal_px = 1;
    double cx = 0, cy = 0;
    double near = 1e-6;

    static Camera frame(const BoundingSphere& bs, const ViewSpec& view) {
        view.validate();
        const double az = view.azimuth_deg * M_PI / 180.0, el = view.elevation_deg * M_PI / 180.0;
        const Vec3d dir{std::cos(el) * std::sin(az), std::sin(el), std::cos(el) * std::cos(az)};
        Camera cam;
        cam.position = bs.center + dir * (view.distance * bs.radius);
        cam.forward = -dir;
        cam.right = normalize(cross(cam.forward, Vec3d{0, 1, 0}));
        cam.up = cross(cam.right, cam.forward);
        cam.focal_px = 0.5 * view.height / std::tan(0.5 * view.fov_deg * M_PI / 180.0);
        cam.cx = 0.5 * view.width;
        cam.cy = 0.5 * view.height;
        cam.near = 1e-3 * bs.radius;
        return cam;
    }

    Vec3d to_camera(const Vec3d& p) const {
        const Vec3d d = p - position;
        return {dot(d, right), dot(d, up), dot(d, forward)};
    }

    // Screen position (u, v) in pixels of a camera-space point with positive depth.
    std::array<double, 2> project(const Vec3d& c) const {
        return {cx + focal_px * c.x / c.z, cy - focal_px * c.y / c.z};
    }
};

struct RenderBuffers {
    Image<std::int32_t> triangle_id;  // -1 = background
    Image<float> depth;               // camera-space depth, +inf at background

    int width() const { return triangle_id.width; }
    int height() const { return triangle_id.height; }
};

namespace detail {

struct ScreenTriangle {
    std::array<double, 2> p[3];
    double inv_z[3];
    double area;
    std::int32_t id;
    int x0, x1, y0, y1;  // inclusive pixel bounds
};

// Pixels on an edge belong to the triangle only when the edge runs in the
// direction below. The shared edge of two consistently wound neighbors has
// opposite direction in each, so exactly one of them claims it.
inline bool owns_edge(const std::array<double, 2>& a, const std::array<double, 2>& b) {
    const double dx = b[0] - a[0], dy = b[1] - a[1];
    return dy > 0 || (dy == 0 && dx < 0);
}

inline double edge_fn(const std::array<double, 2>& a, const std::array<double, 2>& b, double px, double py) {
    return (b[0] - a[0]) * (py - a[1]) - (b[1] - a[1]) * (px - a[0]);
}

// Clips a camera-space triangle against the near plane (Sutherland-Hodgman).
inline int clip_near(const std::array<Vec3d, 3>& in, double near, std::array<Vec3d, 4>& out) {
    int n = 0;
    for (int i = 0; i < 3; ++i) {
        const Vec3d& a = in[static_cast<std::size_t>(i)];
        const Vec3d& b = in[static_cast<std::size_t>((i + 1) % 3)];
        const bool a_in = a.z >= near, b_in = b.z >= near;
        if (a_in) out[static_cast<std::size_t>(n++)] = a;
        if (a_in != b_in) {
            const double t = (near - a.z) / (b.z - a.z);
            out[static_cast<std::size_t>(n++)] = a + (b - a) * t;
        }
    }
    return n;
}

}  // namespace detail

// Rasterizes every triangle at pixel centers and keeps, per pixel, the one with
// the smallest camera-space depth (lower triangle index on exact ties). No
// back-face culling; geometry in front of the near plane only.
inline RenderBuffers rasterize(const Mesh& mesh, const ViewSpec& view, const BoundingSphere& framing) {
    require(!mesh.vertices.empty(), "rasterize: mesh has no vertices");
    const Camera cam = Camera::frame(framing, view);
    const int W = view.width, H = view.height;

    std::vector<Vec3d> cv(mesh.vertices.size());
    for (std::size_t i = 0; i < cv.size(); ++i) cv[i] = cam.to_camera(mesh.vertices[i].cast<double>());

    std::vector<detail::ScreenTriangle> tris;
    tris.reserve(mesh.triangles.size());
    std::array<Vec3d, 4> poly;
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        const auto& tri = mesh.triangles[t];
        const std::array<Vec3d, 3> c{cv[tri[0]], cv[tri[1]], cv[tri[2]]};
        const int n = detail::clip_near(c, cam.near, poly);
        for (int f = 1; f + 1 < n; ++f) {
            detail::ScreenTriangle s;
            const Vec3d* corners[3] = {&poly[0], &poly[static_cast<std::size_t>(f)], &poly[static_cast<std::size_t>(f + 1)]};
            for (int k = 0; k < 3; ++k) {
                s.p[k] = cam.project(*corners[k]);
                s.inv_z[k] = 1.0 / corners[k]->z;
            }
            s.area = detail::edge_fn(s.p[0], s.p[1], s.p[2][0], s.p[2][1]);
            if (s.area == 0 || !std::isfinite(s.area)) continue;
            if (s.area < 0) {
                std::swap(s.p[1], s.p[2]);
                std::swap(s.inv_z[1], s.inv_z[2]);
                s.area = -s.area;
            }
            double lo_x = std::min({s.p[0][0], s.p[1][0], s.p[2][0]});
            double hi_x = std::max({s.p[0][0], s.p[1][0], s.p[2][0]});
            double lo_y = std::min({s.p[0][1], s.p[1][1], s.p[2][1]});
            double hi_y = std::max({s.p[0][1], s.p[1][1], s.p[2][1]});
            if (hi_x < 0 || hi_y < 0 || lo_x > W || lo_y > H) continue;
            s.x0 = std::max(0, static_cast<int>(std::ceil(lo_x - 0.5)));
            s.x1 = std::min(W - 1, static_cast<int>(std::floor(hi_x - 0.5)));
            s.y0 = std::max(0, static_cast<int>(std::ceil(lo_y - 0.5)));
            s.y1 = std::min(H - 1, static_cast<int>(std::floor(hi_y - 0.5)));
            if (s.x0 > s.x1 || s.y0 > s.y1) continue;
            s.id = static_cast<std::int32_t>(t);
            tris.push_back(s);
        }
    }

    RenderBuffers out{Image<std::int32_t>(W, H, -1), Image<float>(W, H, std::numeric_limits<float>::infinity())};
    std::vector<double> zbuf(static_cast<std::size_t>(W) * H, std::numeric_limits<double>::infinity());

    const std::size_t bands = std::min<std::size_t>(static_cast<std::size_t>(H), std::max(1u, thread_count()) * 4);
    parallel_for(bands, [&](std::size_t band) {
        const int row0 = static_cast<int>(band * static_cast<std::size_t>(H) / bands);
        const int row1 = static_cast<int>((band + 1) * static_cast<std::size_t>(H) / bands) - 1;
        for (const auto& s : tris) {
            const int y0 = std::max(s.y0, row0), y1 = std::min(s.y1, row1);
            if (y0 > y1) continue;
            const bool own0 = detail::owns_edge(s.p[1], s.p[2]);
            const bool own1 = detail::owns_edge(s.p[2], s.p[0]);
            const bool own2 = detail::owns_edge(s.p[0], s.p[1]);
            for (int y = y0; y <= y1; ++y) {
                const double py = y + 0.5;
                for (int x = s.x0; x <= s.x1; ++x) {
                    const double px = x + 0.5;
                    const double w0 = detail::edge_fn(s.p[1], s.p[2], px, py);
                    const double w1 = detail::edge_fn(s.p[2], s.p[0], px, py);
                    const double w2 = detail::edge_fn(s.p[0], s.p[1], px, py);
                    if (w0 < 0 || w1 < 0 || w2 < 0) continue;
                    if ((w0 == 0 && !own0) || (w1 == 0 && !own1) || (w2 == 0 && !own2)) continue;
                    const double inv_z = (w0 * s.inv_z[0] + w1 * s.inv_z[1] + w2 * s.inv_z[2]) / s.area;
                    const double z = 1.0 / inv_z;
                    const std::size_t pix = static_cast<std::size_t>(y) * W + x;
                    auto& cur_id = out.triangle_id.data[pix];
                    if (z < zbuf[pix] || (z == zbuf[pix] && s.id < cur_id)) {
                        zbuf[pix] = z;
                        cur_id = s.id;
                    }
                }
            }
        }
    });
    for (std::size_t i = 0; i < zbuf.size(); ++i)
        if (out.triangle_id.data[i] >= 0) out.depth.data[i] = static_cast<float>(zbuf[i]);
    return out;
}

inline RenderBuffers rasterize(const Mesh& mesh, const ViewSpec& view) {
    return rasterize(mesh, view, bounding_sphere(mesh.vertices));
}

// Provoking vertex (last in draw order) of each pixel's triangle; -1 on background.
inline Image<std::int32_t> visible_vertices(const Mesh& mesh, const RenderBuffers& buffers) {
    Image<std::int32_t> out(buffers.width(), buffers.height(), -1);
    const auto n = static_cast<std::int64_t>(mesh.triangles.size());
    for (std::size_t i = 0; i < buffers.triangle_id.data.size(); ++i) {
        const std::int32_t id = buffers.triangle_id.data[i];
        if (id < 0) continue;
        require(id < n, "visible_vertices: triangle id " + std::to_string(id) + " out of range");
        out.data[i] = static_cast<std::int32_t>(mesh.triangles[static_cast<std::size_t>(id)][2]);
    }
    return out;
}

}  // namespace meshparse
