#pragma once

#include <cmath>
#include <cstddef>

#include "berryline/kernels.hpp"

// Element-wise reference formulas. The AVX2 path performs the same IEEE
// operations in the same order (no FMA), so both backends agree bit for bit.
// Internal linkage keeps each translation unit's copy compiled for its own ISA.
namespace berryline::kernels::detail {
namespace {

inline double radicand_one(double c, const BipartiteScalars& s) {
  const double vk2 = s.hop_sum + s.hop_cross * c;
  return vk2 - s.gamma_sq;
}

inline void connection_one(double c, double sn, const BipartiteScalars& s, const ConnectionTerms& out,
                           std::size_t i) {
  const double vk2 = s.hop_sum + s.hop_cross * c;
  const double rad = vk2 - s.gamma_sq;
  const double abs_v = std::sqrt(vk2);
  const double root = std::sqrt(std::fabs(rad));
  const double g_over = s.gamma / root;
  const double v_over = abs_v / root;
  out.theta_prime[i] = s.v_prime * (s.v_prime + s.v * c) / vk2;
  if (rad > 0.0) {
    out.cos_chi_re[i] = 0.0;
    out.cos_chi_im[i] = g_over;
    out.sin_chi_re[i] = v_over;
    out.sin_chi_im[i] = 0.0;
  } else {
    out.cos_chi_re[i] = g_over;
    out.cos_chi_im[i] = 0.0;
    out.sin_chi_re[i] = 0.0;
    out.sin_chi_im[i] = -v_over;
  }
  out.chi_prime_im[i] = -((s.gamma_vvp * sn) / (rad * abs_v));
}

}  // namespace
}  // namespace berryline::kernels::detail
