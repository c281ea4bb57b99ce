#pragma once

#include <array>
#include <cmath>
#include <cstddef>

namespace meshparse {

template <typename T>
struct Vec3 {
    T x{}, y{}, z{};

    constexpr T& operator[](std::size_t i) { return i == 0 ? x : (i == 1 ? y : z); }
    constexpr const T& operator[](std::size_t i) const { return i == 0 ? x : (i == 1 ? y : z); }

    template <typename U>
    constexpr Vec3<U> cast() const {
        return {static_cast<U>(x), static_cast<U>(y), static_cast<U>(z)};
    }

    constexpr Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
    constexpr Vec3& operator-=(const Vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
    constexpr Vec3& operator*=(T s) { x *= s; y *= s; z *= s; return *this; }

    friend constexpr Vec3 operator+(Vec3 a, const Vec3& b) { return a += b; }
    friend constexpr Vec3 operator-(Vec3 a, const Vec3& b) { return a -= b; }
    friend constexpr Vec3 operator*(Vec3 a, T s) { return a *= s; }
    friend constexpr Vec3 operator*(T s, Vec3 a) { return a *= s; }
    friend constexpr Vec3 operator-(const Vec3& a) { return {-a.x, -a.y, -a.z}; }
    friend constexpr bool operator==(const Vec3&, const Vec3&) = default;
};

using Vec3f = Vec3<float>;
using Vec3d = Vec3<double>;

template <typename T>
constexpr T dot(const Vec3<T>& a, const Vec3<T>& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

template <typename T>
constexpr Vec3<T> cross(const Vec3<T>& a, const Vec3<T>& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

template <typename T>
T norm(const Vec3<T>& a) { return std::sqrt(dot(a, a)); }

template <typename T>
Vec3<T> normalize(const Vec3<T>& a) {
    const T n = norm(a);
    return n > T(0) ? a * (T(1) / n) : a;
}

// Squared Euclidean distance. FPS, DBSCAN and the k-NN index all use this exact
// expression so brute-force oracles reproduce their comparisons bit for bit.
template <typename T>
constexpr T distance2(const Vec3<T>& a, const Vec3<T>& b) {
    const T dx = a.x - b.x, dy = a.y - b.y, dz = a.z - b.z;
    return dx * dx + dy * dy + dz * dz;
}

// Row-major 3x3 matrix.
struct Mat3 {
    std::array<double, 9> m{1, 0, 0, 0, 1, 0, 0, 0, 1};

    static constexpr Mat3 identity() { return {}; }

    constexpr double& operator()(int r, int c) { return m[static_cast<std::size_t>(r * 3 + c)]; }
    constexpr double operator()(int r, int c) const { return m[static_cast<std::size_t>(r * 3 + c)]; }

    friend constexpr Mat3 operator*(const Mat3& a, const Mat3& b) {
        Mat3 out;
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) {
                double s = 0;
                for (int k = 0; k < 3; ++k) s += a(r, k) * b(k, c);
                out(r, c) = s;
            }
        return out;
    }

    friend constexpr Vec3d operator*(const Mat3& a, const Vec3d& v) {
        return {a(0, 0) * v.x + a(0, 1) * v.y + a(0, 2) * v.z,
                a(1, 0) * v.x + a(1, 1) * v.y + a(1, 2) * v.z,
                a(2, 0) * v.x + a(2, 1) * v.y + a(2, 2) * v.z};
    }

    constexpr Mat3 transposed() const {
        Mat3 t;
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) t(r, c) = (*this)(c, r);
        return t;
    }

    constexpr double determinant() const {
        const auto& a = *this;
        return a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) -
               a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0)) +
               a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0));
    }
};

// Rodrigues' rotation formula: rotation by `angle` radians about unit `axis`.
inline Mat3 axis_angle(const Vec3d& axis, double angle) {
    const Vec3d k = normalize(axis);
    const double c = std::cos(angle), s = std::sin(angle), t = 1.0 - c;
    Mat3 r;
    r(0, 0) = c + k.x * k.x * t;
    r(0, 1) = k.x * k.y * t - k.z * s;
    r(0, 2) = k.x * k.z * t + k.y * s;
    r(1, 0) = k.y * k.x * t + k.z * s;
    r(1, 1) = c + k.y * k.y * t;
    r(1, 2) = k.y * k.z * t - k.x * s;
    r(2, 0) = k.z * k.x * t - k.y * s;
    r(2, 1) = k.z * k.y * t + k.x * s;
    r(2, 2) = c + k.z * k.z * t;
    return r;
}

// Minimal rotation taking unit vector `from` onto unit vector `to`.
inline Mat3 rotation_between(const Vec3d& from, const Vec3d& to) {
    const Vec3d a = normalize(from), b = normalize(to);
    const Vec3d axis = cross(a, b);
    const double s = norm(axis);
    const double c = dot(a, b);
    if (s < 1e-12) {
        if (c > 0) return Mat3::identity();
        // Antiparallel: any axis orthogonal to `a` works.
        Vec3d ortho = std::abs(a.x) < 0.9 ? cross(a, Vec3d{1, 0, 0}) : cross(a, Vec3d{0, 1, 0});
        return axis_angle(ortho, M_PI);
    }
    return axis_angle(axis, std::atan2(s, c));
}

}  // namespace meshparse
