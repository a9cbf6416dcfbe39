#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>

namespace berryline {

using cplx = std::complex<double>;

struct Vec2 {
  std::array<cplx, 2> c{};

  cplx& operator[](int i) { return c[static_cast<std::size_t>(i)]; }
  const cplx& operator[](int i) const { return c[static_cast<std::size_t>(i)]; }
};

// Row-major 2x2 complex matrix.
struct Matrix2 {
  std::array<cplx, 4> m{};

  Matrix2() = default;
  Matrix2(cplx a, cplx b, cplx c, cplx d) : m{a, b, c, d} {}

  cplx& operator()(int r, int col) { return m[static_cast<std::size_t>(2 * r + col)]; }
  const cplx& operator()(int r, int col) const { return m[static_cast<std::size_t>(2 * r + col)]; }

  static Matrix2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
  static Matrix2 zero() { return {}; }
};

inline Vec2 operator+(const Vec2& a, const Vec2& b) { return {{a[0] + b[0], a[1] + b[1]}}; }
inline Vec2 operator-(const Vec2& a, const Vec2& b) { return {{a[0] - b[0], a[1] - b[1]}}; }
inline Vec2 operator*(cplx s, const Vec2& a) { return {{s * a[0], s * a[1]}}; }
inline Vec2 operator*(const Vec2& a, cplx s) { return s * a; }

inline Matrix2 operator+(const Matrix2& a, const Matrix2& b) {
  return {a.m[0] + b.m[0], a.m[1] + b.m[1], a.m[2] + b.m[2], a.m[3] + b.m[3]};
}
inline Matrix2 operator-(const Matrix2& a, const Matrix2& b) {
  return {a.m[0] - b.m[0], a.m[1] - b.m[1], a.m[2] - b.m[2], a.m[3] - b.m[3]};
}
inline Matrix2 operator*(cplx s, const Matrix2& a) {
  return {s * a.m[0], s * a.m[1], s * a.m[2], s * a.m[3]};
}
inline Matrix2 operator*(const Matrix2& a, const Matrix2& b) {
  return {a.m[0] * b.m[0] + a.m[1] * b.m[2], a.m[0] * b.m[1] + a.m[1] * b.m[3],
          a.m[2] * b.m[0] + a.m[3] * b.m[2], a.m[2] * b.m[1] + a.m[3] * b.m[3]};
}
inline Vec2 operator*(const Matrix2& a, const Vec2& v) {
  return {{a.m[0] * v[0] + a.m[1] * v[1], a.m[2] * v[0] + a.m[3] * v[1]}};
}

inline Matrix2 adjoint(const Matrix2& a) {
  return {std::conj(a.m[0]), std::conj(a.m[2]), std::conj(a.m[1]), std::conj(a.m[3])};
}
inline cplx trace(const Matrix2& a) { return a.m[0] + a.m[3]; }
inline cplx det(const Matrix2& a) { return a.m[0] * a.m[3] - a.m[1] * a.m[2]; }

inline double frobenius(const Matrix2& a) {
  return std::sqrt(std::norm(a.m[0]) + std::norm(a.m[1]) + std::norm(a.m[2]) + std::norm(a.m[3]));
}
inline double norm(const Vec2& v) { return std::sqrt(std::norm(v[0]) + std::norm(v[1])); }

// <a|b> with a stored as a ket.
inline cplx inner(const Vec2& a, const Vec2& b) { return std::conj(a[0]) * b[0] + std::conj(a[1]) * b[1]; }

inline bool is_finite(const cplx& z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }
inline bool is_finite(const Vec2& v) { return is_finite(v[0]) && is_finite(v[1]); }
inline bool is_finite(const Matrix2& a) {
  for (const auto& z : a.m)
    if (!is_finite(z)) return false;
  return true;
}

inline double max_abs_diff(const Matrix2& a, const Matrix2& b) {
  double d = 0.0;
  for (int i = 0; i < 4; ++i) d = std::max(d, std::abs(a.m[static_cast<std::size_t>(i)] - b.m[static_cast<std::size_t>(i)]));
  return d;
}

}  // namespace berryline
