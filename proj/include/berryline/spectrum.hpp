#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

#include "berryline/matrix2.hpp"
#include "berryline/models.hpp"

namespace berryline {

enum class Region { gapless_true_crossing, type_i, type_ii, none };

std::string_view region_name(Region r);

struct CrossingReport {
  Region region = Region::none;
  // Labels that also apply on a boundary line (the inequalities overlap there).
  std::vector<Region> also_on;
  std::vector<double> witnesses;
  double gap_min_re = 0.0;
  double gap_min_im = 0.0;
};

// E+ - E- = 2 sqrt(|v_k|^2 - Gamma^2); real for a positive radicand, +i times
// real otherwise.
cplx complex_gap(const BipartiteParams& p, double k);

// Region from the inequalities |q-1| <= eta <= q+1 (gapless, boundaries
// included), eta <= |q-1| (type I), eta >= q+1 (type II).
CrossingReport classify_region(double q, double eta);

// Scans k on (-pi, pi], bisects radicand sign changes and checks the analytic
// label. Throws ClassificationMismatch on disagreement.
CrossingReport verify_region(double q, double eta, std::size_t k_samples = 1024);

// Radicand 1 + q^2 + 2q cos k - eta^2.
double radicand_qeta(double q, double eta, double k);

}  // namespace berryline
