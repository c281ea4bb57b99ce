#pragma once

// Slow reference implementations. Nothing here calls into the code under test
// except for plain data types.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "meshparse/geometry.hpp"
#include "meshparse/render.hpp"
#include "meshparse/types.hpp"

namespace oracle {

using meshparse::Vec3d;
using meshparse::Vec3f;

// Morton key as a bit string: x,y,z bits from most to least significant, each
// coordinate min-max normalized per axis and rounded to B bits.
inline std::vector<std::string> morton_strings(const std::vector<Vec3f>& pts, int bits) {
    double lo[3], hi[3];
    for (int a = 0; a < 3; ++a) {
        lo[a] = std::numeric_limits<double>::infinity();
        hi[a] = -lo[a];
    }
    for (const auto& p : pts)
        for (int a = 0; a < 3; ++a) {
            lo[a] = std::min<double>(lo[a], p[static_cast<std::size_t>(a)]);
            hi[a] = std::max<double>(hi[a], p[static_cast<std::size_t>(a)]);
        }
    const long double levels = std::pow(2.0L, bits) - 1;
    std::vector<std::string> out;
    out.reserve(pts.size());
    for (const auto& p : pts) {
        unsigned long q[3];
        for (int a = 0; a < 3; ++a) {
            // Normalize in float, the precision the points are stored at.
            const float ext = static_cast<float>(hi[a]) - static_cast<float>(lo[a]);
            const float u = ext > 0 ? (p[static_cast<std::size_t>(a)] - static_cast<float>(lo[a])) / ext : 0.0f;
            q[a] = static_cast<unsigned long>(std::floor(static_cast<long double>(u) * levels + 0.5L));
        }
        std::string s;
        for (int b = bits - 1; b >= 0; --b)
            for (int a = 0; a < 3; ++a) s += ((q[a] >> b) & 1) ? '1' : '0';
        out.push_back(s);
    }
    return out;
}

inline std::vector<std::uint32_t> morton_order(const std::vector<Vec3f>& pts, int bits) {
    const auto keys = morton_strings(pts, bits);
    std::vector<std::uint32_t> idx(pts.size());
    std::iota(idx.begin(), idx.end(), 0u);
    std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return keys[a] < keys[b]; });
    return idx;
}

inline float d2f(const Vec3f& a, const Vec3f& b) {
    const float dx = a.x - b.x, dy = a.y - b.y, dz = a.z - b.z;
    return dx * dx + dy * dy + dz * dz;
}

// Greedy FPS that recomputes every point's distance to the whole selected set
// at each step. O(k^2 N).
inline std::vector<std::uint32_t> fps(const std::vector<Vec3f>& pts, std::size_t k, std::uint32_t seed = 0) {
    std::vector<std::uint32_t> sel;
    if (k == 0) return sel;
    sel.push_back(seed);
    std::vector<char> taken(pts.size(), 0);
    taken[seed] = 1;
    while (sel.size() < k) {
        float best = -1;
        std::uint32_t arg = 0;
        for (std::uint32_t i = 0; i < pts.size(); ++i) {
            if (taken[i]) continue;
            float m = std::numeric_limits<float>::infinity();
            for (auto s : sel) m = std::min(m, d2f(pts[i], pts[s]));
            if (m > best) {
                best = m;
                arg = i;
            }
        }
        sel.push_back(arg);
        taken[arg] = 1;
    }
    return sel;
}

inline double covering_radius(const std::vector<Vec3f>& pts, const std::vector<std::uint32_t>& sel) {
    double r = 0;
    for (const auto& p : pts) {
        double m = std::numeric_limits<double>::infinity();
        for (auto s : sel) m = std::min(m, meshparse::distance2(p.cast<double>(), pts[s].cast<double>()));
        r = std::max(r, m);
    }
    return std::sqrt(r);
}

// k nearest by (squared distance, index) via a full sort.
inline std::vector<std::pair<double, std::uint32_t>> knn(const std::vector<Vec3f>& pts, const Vec3f& q, std::size_t k) {
    std::vector<std::pair<double, std::uint32_t>> all;
    for (std::uint32_t i = 0; i < pts.size(); ++i) all.push_back({meshparse::distance2(pts[i].cast<double>(), q.cast<double>()), i});
    std::sort(all.begin(), all.end());
    all.resize(std::min(k, all.size()));
    return all;
}

// Textbook DBSCAN on an O(N^2) neighbor matrix. Clusters are the connected
// components of core points, numbered by their smallest member; a border
// point joins the lowest-numbered cluster among its core neighbors.
inline std::vector<int> dbscan(const std::vector<Vec3f>& pts, double eps, std::size_t min_samples) {
    const std::size_t n = pts.size();
    const double e2 = eps * eps;
    std::vector<std::vector<std::uint32_t>> nb(n);
    for (std::uint32_t i = 0; i < n; ++i)
        for (std::uint32_t j = 0; j < n; ++j)
            if (meshparse::distance2(pts[i].cast<double>(), pts[j].cast<double>()) <= e2) nb[i].push_back(j);
    std::vector<char> core(n);
    for (std::size_t i = 0; i < n; ++i) core[i] = nb[i].size() >= min_samples;

    std::vector<int> label(n, -1);
    int next = 0;
    for (std::uint32_t i = 0; i < n; ++i) {
        if (!core[i] || label[i] != -1) continue;
        std::vector<std::uint32_t> stack{i};
        label[i] = next;
        while (!stack.empty()) {
            const auto p = stack.back();
            stack.pop_back();
            for (auto q : nb[p])
                if (core[q] && label[q] == -1) {
                    label[q] = next;
                    stack.push_back(q);
                }
        }
        ++next;
    }
    for (std::uint32_t i = 0; i < n; ++i) {
        if (core[i]) continue;
        for (auto q : nb[i])
            if (core[q] && (label[i] == -1 || label[q] < label[i])) label[i] = label[q];
    }
    return label;
}

// Same partition up to renaming of non-noise ids.
inline bool same_clustering(const std::vector<int>& a, const std::vector<std::int32_t>& b) {
    if (a.size() != b.size()) return false;
    std::map<int, int> ab, ba;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if ((a[i] < 0) != (b[i] < 0)) return false;
        if (a[i] < 0) continue;
        auto [it1, fresh1] = ab.emplace(a[i], b[i]);
        auto [it2, fresh2] = ba.emplace(b[i], a[i]);
        if (it1->second != b[i] || it2->second != a[i]) return false;
    }
    return true;
}

// Ray-cast renderer: one ray per pixel center from a camera built here from the
// view parameters, nearest hit by Moller-Trumbore.
struct RayCaster {
    Vec3d eye, fwd, right, up;
    double f, cx, cy, near;

    RayCaster(const meshparse::Mesh& m, const meshparse::ViewSpec& v) {
        Vec3d c{};
        for (const auto& p : m.vertices) c += p.cast<double>();
        c *= 1.0 / static_cast<double>(m.vertices.size());
        double r = 0;
        for (const auto& p : m.vertices) r = std::max(r, std::sqrt(meshparse::distance2(p.cast<double>(), c)));
        if (r == 0) r = 1;
        aim(v, c, r);
    }

    // explicit orbit center and radius
    RayCaster(const meshparse::ViewSpec& v, Vec3d c, double r) { aim(v, c, r); }

    void aim(const meshparse::ViewSpec& v, Vec3d c, double r) {
        const double az = v.azimuth_deg * M_PI / 180, el = v.elevation_deg * M_PI / 180;
        const Vec3d back{std::cos(el) * std::sin(az), std::sin(el), std::cos(el) * std::cos(az)};
        eye = c + back * (v.distance * r);
        fwd = back * -1.0;
        right = meshparse::normalize(meshparse::cross(fwd, Vec3d{0, 1, 0}));
        up = meshparse::cross(right, fwd);
        f = 0.5 * v.height / std::tan(0.5 * v.fov_deg * M_PI / 180);
        cx = 0.5 * v.width;
        cy = 0.5 * v.height;
        near = 1e-3 * r;
    }

    // Returns (triangle id, depth); id -1 on a miss.
    std::pair<std::int32_t, double> cast(const meshparse::Mesh& m, double px, double py) const {
        const Vec3d dir = fwd + right * ((px - cx) / f) + up * (-(py - cy) / f);
        std::int32_t best = -1;
        double best_t = std::numeric_limits<double>::infinity();
        for (std::size_t t = 0; t < m.triangles.size(); ++t) {
            const Vec3d a = m.vertices[m.triangles[t][0]].cast<double>();
            const Vec3d b = m.vertices[m.triangles[t][1]].cast<double>();
            const Vec3d c = m.vertices[m.triangles[t][2]].cast<double>();
            const Vec3d e1 = b - a, e2 = c - a;
            const Vec3d pv = meshparse::cross(dir, e2);
            const double det = meshparse::dot(e1, pv);
            if (std::abs(det) < 1e-300) continue;
            const Vec3d tv = eye - a;
            const double u = meshparse::dot(tv, pv) / det;
            if (u < 0 || u > 1) continue;
            const Vec3d qv = meshparse::cross(tv, e1);
            const double w = meshparse::dot(dir, qv) / det;
            if (w < 0 || u + w > 1) continue;
            const double hit = meshparse::dot(e2, qv) / det;  // depth, since dir has unit forward component
            if (hit < near) continue;
            if (hit < best_t) {
                best_t = hit;
                best = static_cast<std::int32_t>(t);
            }
        }
        return {best, best_t};
    }
};

inline meshparse::Image<std::int32_t> raycast(const meshparse::Mesh& m, const meshparse::ViewSpec& v,
                                              const RayCaster& rc) {
    meshparse::Image<std::int32_t> img(v.width, v.height, -1);
    for (int y = 0; y < v.height; ++y)
        for (int x = 0; x < v.width; ++x) img.at(x, y) = rc.cast(m, x + 0.5, y + 0.5).first;
    return img;
}

inline meshparse::Image<std::int32_t> raycast(const meshparse::Mesh& m, const meshparse::ViewSpec& v) {
    return raycast(m, v, RayCaster(m, v));
}

// Random triangle soup inside the unit cube.
inline meshparse::Mesh random_scene(std::mt19937_64& rng, std::size_t triangles) {
    std::uniform_real_distribution<float> u(-1, 1);
    meshparse::Mesh m;
    for (std::size_t t = 0; t < triangles; ++t) {
        const Vec3f c{u(rng), u(rng), u(rng)};
        for (int k = 0; k < 3; ++k) m.vertices.push_back(c + Vec3f{u(rng), u(rng), u(rng)} * 0.4f);
        const auto b = static_cast<std::uint32_t>(3 * t);
        m.triangles.push_back({b, b + 1, b + 2});
    }
    return m;
}

}  // namespace oracle
