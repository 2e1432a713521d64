#pragma once
#include <array>
#include <cmath>
#include <complex>

namespace symcap {

/// Point of R^4 = C^2 stored as (x1, y1, x2, y2), z_j = x_j + i y_j.
using Point4 = std::array<double, 4>;

inline Point4 operator+(const Point4& a, const Point4& b) {
    return {a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]};
}
inline Point4 operator-(const Point4& a, const Point4& b) {
    return {a[0] - b[0], a[1] - b[1], a[2] - b[2], a[3] - b[3]};
}
inline Point4 operator*(double s, const Point4& a) {
    return {s * a[0], s * a[1], s * a[2], s * a[3]};
}
inline double dot(const Point4& a, const Point4& b) {
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3];
}
inline double norm2(const Point4& a) { return dot(a, a); }
inline double norm(const Point4& a) { return std::sqrt(dot(a, a)); }

inline std::complex<double> z1(const Point4& p) { return {p[0], p[1]}; }
inline std::complex<double> z2(const Point4& p) { return {p[2], p[3]}; }
inline Point4 from_complex(std::complex<double> a, std::complex<double> b) {
    return {a.real(), a.imag(), b.real(), b.imag()};
}

/// Multiplication by i in each complex coordinate.
inline Point4 apply_J(const Point4& v) { return {-v[1], v[0], -v[3], v[2]}; }

/// Quaternionic partners of i: j(z1,z2) = (-conj z2, conj z1), k = i*j.
inline Point4 apply_jq(const Point4& v) { return {-v[2], v[3], v[0], -v[1]}; }
inline Point4 apply_kq(const Point4& v) { return apply_J(apply_jq(v)); }

/// Standard symplectic form sum dx_j ^ dy_j.
inline double eval_symplectic(const Point4& u, const Point4& v) {
    return u[0] * v[1] - u[1] * v[0] + u[2] * v[3] - u[3] * v[2];
}

/// Liouville form 1/2 sum (x_j dy_j - y_j dx_j) at x applied to v.
inline double eval_liouville(const Point4& x, const Point4& v) {
    return 0.5 * (x[0] * v[1] - x[1] * v[0] + x[2] * v[3] - x[3] * v[2]);
}

}  // namespace symcap
