#include "berryline/biortho.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "berryline/errors.hpp"

namespace berryline {
namespace {

cplx half_discriminant(const Matrix2& h) {
  const cplx d = 0.5 * (h(0, 0) - h(1, 1));
  return d * d + h(0, 1) * h(1, 0);
}

// Null vector of (H - E) from whichever row gives the larger candidate.
Vec2 right_null(const Matrix2& h, cplx e) {
  const Vec2 from_row0{{h(0, 1), e - h(0, 0)}};
  const Vec2 from_row1{{e - h(1, 1), h(1, 0)}};
  return norm(from_row0) >= norm(from_row1) ? from_row0 : from_row1;
}

// Row vector u with u (H - E) = 0.
Vec2 left_null_row(const Matrix2& h, cplx e) {
  const Vec2 from_col0{{h(1, 0), e - h(0, 0)}};
  const Vec2 from_col1{{e - h(1, 1), h(0, 1)}};
  return norm(from_col0) >= norm(from_col1) ? from_col0 : from_col1;
}

void fix_largest_component(Vec2& right, Vec2& row) {
  const double n = norm(right);
  right = (1.0 / n) * right;
  const int big = std::abs(right[1]) > std::abs(right[0]) ? 1 : 0;
  const cplx phase = std::abs(right[big]) / right[big];
  right = phase * right;
  right[big] = std::abs(right[big]);
  const cplx pair = row[0] * right[0] + row[1] * right[1];
  row = (1.0 / pair) * row;
}

Vec2 conj(const Vec2& v) { return {{std::conj(v[0]), std::conj(v[1])}}; }

bool descending(cplx a, cplx b, double scale) {
  if (std::abs(a.real() - b.real()) > 1e-12 * scale) return a.real() > b.real();
  return a.imag() >= b.imag();
}

// Looks for a zero of the discriminant on the straight segment between two
// consecutive matrices; returns true when the gap closes in between.
bool gap_closes_between(const Matrix2& a, const Matrix2& b) {
  const cplx d0 = half_discriminant(a);
  const cplx d1 = half_discriminant(b);
  const cplx dh = half_discriminant(0.5 * (a + b));
  const cplx c0 = d0;
  const cplx c1 = -3.0 * d0 + 4.0 * dh - d1;
  const cplx c2 = 2.0 * d0 - 4.0 * dh + 2.0 * d1;
  const double scale = std::abs(d0) + std::abs(dh) + std::abs(d1);
  if (scale == 0.0) return false;

  std::array<cplx, 2> roots{};
  int nroots = 0;
  if (std::abs(c2) <= 1e-14 * scale) {
    if (std::abs(c1) <= 1e-14 * scale) return false;
    roots[nroots++] = -c0 / c1;
  } else {
    const cplx s = std::sqrt(c1 * c1 - 4.0 * c2 * c0);
    const cplx q = -0.5 * (c1 + (std::real(std::conj(c1) * s) >= 0.0 ? s : -s));
    roots[nroots++] = q / c2;
    if (std::abs(q) > 0.0) roots[nroots++] = c0 / q;
  }

  const double hscale = std::max({1.0, frobenius(a), frobenius(b)});
  const double tol_gap = 1e-9 * hscale;
  const double limit = std::max(0.25 * tol_gap * tol_gap, 1e-12 * scale);
  for (int i = 0; i < nroots; ++i) {
    const double t = roots[static_cast<std::size_t>(i)].real();
    if (!(t > 0.0 && t < 1.0)) continue;
    const cplx value = c0 + t * (c1 + t * c2);
    if (std::abs(value) <= limit) return true;
  }
  return false;
}

}  // namespace

double degeneracy_tolerance(const Matrix2& h) { return 1e-9 * std::max(1.0, frobenius(h)); }

EigenSystem eig2(const Matrix2& h) {
  if (!is_finite(h)) throw NonFiniteInput("eig2: matrix has non-finite entries");

  const cplx mean = 0.5 * (h(0, 0) + h(1, 1));
  const cplx s = std::sqrt(half_discriminant(h));
  cplx e0 = mean + s;
  cplx e1 = mean - s;
  const double scale = std::max(1.0, frobenius(h));
  if (!descending(e0, e1, scale)) std::swap(e0, e1);

  if (std::abs(e0 - e1) <= degeneracy_tolerance(h)) {
    const Matrix2 shifted = h - mean * Matrix2::identity();
    if (frobenius(shifted) <= degeneracy_tolerance(h))
      throw DegenerateSpectrum("eig2: degenerate eigenvalues");
    throw DefectiveMatrix("eig2: eigenvector matrix is singular (exceptional point)");
  }

  EigenSystem es;
  es.values = {e0, e1};
  for (int i = 0; i < 2; ++i) {
    Vec2 right = right_null(h, es.values[static_cast<std::size_t>(i)]);
    Vec2 row = left_null_row(h, es.values[static_cast<std::size_t>(i)]);
    if (norm(right) == 0.0 || norm(row) == 0.0)
      throw DefectiveMatrix("eig2: missing eigenvector");
    const cplx pair = row[0] * right[0] + row[1] * right[1];
    if (std::abs(pair) <= 1e-13 * norm(right) * norm(row))
      throw DefectiveMatrix("eig2: left/right pairing vanishes (exceptional point)");
    fix_largest_component(right, row);
    es.right[static_cast<std::size_t>(i)] = right;
    es.left[static_cast<std::size_t>(i)] = conj(row);
  }
  return es;
}

double residual(const Matrix2& h, const EigenSystem& es) {
  double r = 0.0;
  for (int s = 0; s < 2; ++s) {
    const auto u = static_cast<std::size_t>(s);
    r = std::max(r, norm(h * es.right[u] - es.values[u] * es.right[u]));
  }
  return r;
}

double biorthonormality_error(const EigenSystem& es) {
  double r = 0.0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      const cplx ov = inner(es.left[static_cast<std::size_t>(i)], es.right[static_cast<std::size_t>(j)]);
      r = std::max(r, std::abs(ov - (i == j ? 1.0 : 0.0)));
    }
  return r;
}

double frame_fidelity(const EigenSystem& from, int a, const EigenSystem& to, int b) {
  const auto ua = static_cast<std::size_t>(a);
  const auto ub = static_cast<std::size_t>(b);
  return std::abs(inner(from.left[ua], to.right[ub]) * inner(to.left[ub], from.right[ua]));
}

FrameTracker::FrameTracker(TrackOptions options) : options_(options) {}

const EigenSystem& FrameTracker::push(const Matrix2& h) {
  const std::size_t index = count_;
  if (count_ > 0 && options_.detect_interpolated_crossing && gap_closes_between(previous_h_, h))
    throw DegenerateSpectrum("eigenvalues cross between path samples " + std::to_string(index - 1) +
                                 " and " + std::to_string(index),
                             index);

  EigenSystem next;
  try {
    next = eig2(h);
  } catch (const DegenerateSpectrum& e) {
    throw DegenerateSpectrum(e.what(), index);
  } catch (const DefectiveMatrix& e) {
    throw DefectiveMatrix(e.what(), index);
  }

  if (count_ > 0) {
    const double keep = frame_fidelity(current_, 0, next, 0) * frame_fidelity(current_, 1, next, 1);
    const double swap = frame_fidelity(current_, 0, next, 1) * frame_fidelity(current_, 1, next, 0);
    if (swap > keep) {
      std::swap(next.values[0], next.values[1]);
      std::swap(next.right[0], next.right[1]);
      std::swap(next.left[0], next.left[1]);
    }
    for (int s = 0; s < 2; ++s)
      if (frame_fidelity(current_, s, next, s) < options_.min_fidelity)
        throw PathTooCoarse("overlap between consecutive path samples below threshold", index);
  }

  if (options_.gauge == Gauge::symmetric) {
    for (int s = 0; s < 2; ++s) {
      const auto u = static_cast<std::size_t>(s);
      Vec2 row = next.dual_row(s);
      Vec2& right = next.right[u];
      if (count_ == 0) {
        const double p1 = std::abs(right[1] * row[1]);
        reference_[u] = p1 < 1e-6 ? 0 : 1;
      }
      const int r = reference_[u];
      if (std::abs(right[r] * row[r]) < 1e-14)
        throw SingularLoop("symmetric gauge reference component vanishes", index);
      cplx g = std::sqrt(row[r] / right[r]);
      if (count_ > 0) {
        const Vec2 prev_row = current_.dual_row(s);
        const cplx ov = prev_row[0] * right[0] + prev_row[1] * right[1];
        if (std::real(g * ov) < 0.0) g = -g;
      }
      right = g * right;
      row = (1.0 / g) * row;
      next.left[u] = conj(row);
    }
  }

  previous_h_ = h;
  current_ = next;
  ++count_;
  return current_;
}

std::vector<EigenSystem> track_along_path(std::span<const Matrix2> matrices, TrackOptions options) {
  FrameTracker tracker(options);
  std::vector<EigenSystem> out;
  out.reserve(matrices.size());
  for (const auto& h : matrices) out.push_back(tracker.push(h));
  return out;
}

}  // namespace berryline
