#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "berryline/matrix2.hpp"

namespace berryline {

enum class Band : int { plus = 0, minus = 1 };

constexpr int index_of(Band b) { return static_cast<int>(b); }
constexpr Band other(Band b) { return b == Band::plus ? Band::minus : Band::plus; }

// Eigenvalues, right vectors and left vectors (kets of H^dagger) with
// <left_i|right_j> = delta_ij. Slot 0 is the "+" band, slot 1 the "-" band.
struct EigenSystem {
  std::array<cplx, 2> values{};
  std::array<Vec2, 2> right{};
  std::array<Vec2, 2> left{};

  // Row vector <lambda_s| as plain components: conj(left_s).
  Vec2 dual_row(int s) const {
    const Vec2& l = left[static_cast<std::size_t>(s)];
    return {{std::conj(l[0]), std::conj(l[1])}};
  }
};

// |E+ - E-| at or below this is treated as a degenerate spectrum.
double degeneracy_tolerance(const Matrix2& h);

// Closed-form eigen-decomposition. Ordering: descending real part, ties by
// descending imaginary part. Gauge: the largest-modulus component of each
// right vector is real-positive, right vectors have unit norm.
EigenSystem eig2(const Matrix2& h);

double residual(const Matrix2& h, const EigenSystem& es);
double biorthonormality_error(const EigenSystem& es);

enum class Gauge {
  largest_component,  // same static rule as eig2
  symmetric,          // psi_s[r] == <lambda_s|[r] on a reference component r, sign by continuity
};

struct TrackOptions {
  Gauge gauge = Gauge::largest_component;
  double min_fidelity = 0.9;
  bool detect_interpolated_crossing = true;
};

// Continuity tracker: consumes matrices one at a time, keeps band labels by
// maximal biorthogonal fidelity with the previous frame and fixes the phase
// according to the chosen gauge.
class FrameTracker {
 public:
  explicit FrameTracker(TrackOptions options = {});

  const EigenSystem& push(const Matrix2& h);

  std::size_t count() const { return count_; }
  const EigenSystem& current() const { return current_; }
  std::array<int, 2> reference_components() const { return reference_; }

 private:
  TrackOptions options_;
  std::size_t count_ = 0;
  Matrix2 previous_h_{};
  EigenSystem current_{};
  std::array<int, 2> reference_{1, 1};
};

// |<l_a|p_b><l_b'|p_a'>| between consecutive frames; 1 for identical frames.
double frame_fidelity(const EigenSystem& from, int a, const EigenSystem& to, int b);

std::vector<EigenSystem> track_along_path(std::span<const Matrix2> matrices, TrackOptions options = {});

}  // namespace berryline
