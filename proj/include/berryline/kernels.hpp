#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>

namespace berryline::kernels {

enum class Backend { scalar, avx2 };

std::string_view backend_name(Backend b);
bool avx2_supported();
// Backend used by the dispatching entry points. BERRYLINE_SIMD=scalar forces
// the reference path.
Backend active_backend();
// Test hook; std::nullopt restores automatic selection.
void force_backend(std::optional<Backend> b);

// Bipartite hopping data in the form the kernels consume:
// |v_k|^2 = hop_sum + hop_cross * cos k, radicand = |v_k|^2 - gamma_sq.
struct BipartiteScalars {
  double v = 1.0;
  double v_prime = 0.0;
  double gamma = 0.0;
  double hop_sum = 1.0;    // v^2 + v'^2
  double hop_cross = 0.0;  // 2 v v'
  double gamma_sq = 0.0;
  double gamma_vvp = 0.0;  // Gamma v v'

  static BipartiteScalars make(double v, double v_prime, double gamma);
};

// Per-k closed-form pieces of the bipartite connection, principal branch of
// sqrt(|v_k|^2 - Gamma^2): theta'_k, cos chi, sin chi and Im chi'_k (chi' is
// purely imaginary).
struct ConnectionTerms {
  std::span<double> theta_prime;
  std::span<double> cos_chi_re, cos_chi_im;
  std::span<double> sin_chi_re, sin_chi_im;
  std::span<double> chi_prime_im;
};

void radicand(std::span<const double> cos_k, const BipartiteScalars& s, std::span<double> out);
void connection_terms(std::span<const double> cos_k, std::span<const double> sin_k, const BipartiteScalars& s,
                      const ConnectionTerms& out);

namespace scalar {
void radicand(const double* cos_k, std::size_t n, const BipartiteScalars& s, double* out);
void connection_terms(const double* cos_k, const double* sin_k, std::size_t n, const BipartiteScalars& s,
                      const ConnectionTerms& out);
}  // namespace scalar

namespace avx2 {
bool compiled();
void radicand(const double* cos_k, std::size_t n, const BipartiteScalars& s, double* out);
void connection_terms(const double* cos_k, const double* sin_k, std::size_t n, const BipartiteScalars& s,
                      const ConnectionTerms& out);
}  // namespace avx2

}  // namespace berryline::kernels
