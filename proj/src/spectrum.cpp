#include "berryline/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "berryline/errors.hpp"
#include "berryline/kernels.hpp"

namespace berryline {
namespace {

constexpr double boundary_tol = 1e-12;

void check_qeta(double q, double eta) {
  if (!std::isfinite(q) || !std::isfinite(eta) || !(q > 0.0) || eta < 0.0)
    throw InvalidArgument("region classification requires q > 0 and eta >= 0");
}

double wrap_k(double k) {
  while (k <= -pi) k += 2 * pi;
  while (k > pi) k -= 2 * pi;
  return k;
}

double bisect(double q, double eta, double lo, double hi) {
  double flo = radicand_qeta(q, eta, lo);
  while (hi - lo > 1e-10) {
    const double mid = 0.5 * (lo + hi);
    const double fm = radicand_qeta(q, eta, mid);
    if (fm == 0.0) return mid;
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

void add_witness(std::vector<double>& ws, double k) {
  k = wrap_k(k);
  for (double w : ws)
    if (std::abs(w - k) < 1e-9) return;
  ws.push_back(k);
}

}  // namespace

std::string_view region_name(Region r) {
  switch (r) {
    case Region::gapless_true_crossing:
      return "GAPLESS_TRUE_CROSSING";
    case Region::type_i:
      return "TYPE_I";
    case Region::type_ii:
      return "TYPE_II";
    case Region::none:
      break;
  }
  return "NONE";
}

double radicand_qeta(double q, double eta, double k) { return 1.0 + q * q + 2.0 * q * std::cos(k) - eta * eta; }

cplx complex_gap(const BipartiteParams& p, double k) {
  return 2.0 * std::sqrt(cplx(bipartite_radicand(p, k), 0.0));
}

CrossingReport classify_region(double q, double eta) {
  check_qeta(q, eta);
  const double lo = std::abs(q - 1.0);
  const double hi = q + 1.0;
  const bool on_lo = std::abs(eta - lo) <= boundary_tol;
  const bool on_hi = std::abs(eta - hi) <= boundary_tol;

  CrossingReport r;
  const double rad_min = lo * lo - eta * eta;
  const double rad_max = hi * hi - eta * eta;
  if (eta < lo && !on_lo) {
    r.region = Region::type_i;
    r.gap_min_re = 2.0 * std::sqrt(rad_min);
    return r;
  }
  if (eta > hi && !on_hi) {
    r.region = Region::type_ii;
    r.gap_min_im = 2.0 * std::sqrt(-rad_max);
    return r;
  }
  r.region = Region::gapless_true_crossing;
  if (on_lo) r.also_on.push_back(Region::type_i);
  if (on_hi) r.also_on.push_back(Region::type_ii);
  const double c = std::clamp((eta * eta - 1.0 - q * q) / (2.0 * q), -1.0, 1.0);
  const double ks = std::acos(c);
  if (ks < 1e-12) {
    r.witnesses = {0.0};
  } else if (pi - ks < 1e-12) {
    r.witnesses = {pi};
  } else {
    r.witnesses = {-ks, ks};
  }
  return r;
}

CrossingReport verify_region(double q, double eta, std::size_t k_samples) {
  check_qeta(q, eta);
  if (k_samples < 256) throw BadResolution("verify_region needs at least 256 k samples");
  const CrossingReport analytic = classify_region(q, eta);

  const std::size_t n = k_samples;
  const double h = 2 * pi / static_cast<double>(n);
  std::vector<double> ks(n), cs(n), rad(n);
  for (std::size_t j = 0; j < n; ++j) {
    ks[j] = -pi + h * static_cast<double>(j + 1);
    cs[j] = std::cos(ks[j]);
  }
  kernels::radicand(cs, kernels::BipartiteScalars::make(1.0, q, eta), rad);

  const double touch = 4.0 * (1.0 + q) * 1e-12;
  std::vector<double> witnesses;
  for (double k : {0.0, pi})
    if (std::abs(radicand_qeta(q, eta, k)) <= touch) add_witness(witnesses, k);

  bool all_pos = true, all_neg = true;
  double min_re = INFINITY, min_im = INFINITY;
  for (std::size_t j = 0; j < n; ++j) {
    const double r0 = rad[j];
    const double r1 = rad[(j + 1) % n];
    all_pos = all_pos && r0 > 0.0;
    all_neg = all_neg && r0 < 0.0;
    min_re = std::min(min_re, 2.0 * std::sqrt(std::max(r0, 0.0)));
    min_im = std::min(min_im, 2.0 * std::sqrt(std::max(-r0, 0.0)));
    if (std::abs(r0) <= touch) {
      add_witness(witnesses, ks[j]);
    } else if (std::abs(r1) > touch && (r0 < 0.0) != (r1 < 0.0)) {
      add_witness(witnesses, bisect(q, eta, ks[j], ks[j] + h));
    }
  }
  std::sort(witnesses.begin(), witnesses.end());

  for (double w : witnesses)
    if (std::abs(radicand_qeta(q, eta, w)) > 1e-8)
      throw ClassificationMismatch("witness does not satisfy the crossing condition");

  Region numeric = Region::none;
  if (!witnesses.empty())
    numeric = Region::gapless_true_crossing;
  else if (all_pos)
    numeric = Region::type_i;
  else if (all_neg)
    numeric = Region::type_ii;
  if (numeric != analytic.region)
    throw ClassificationMismatch("numeric scan gives " + std::string(region_name(numeric)) + ", analytic label is " +
                                 std::string(region_name(analytic.region)));

  CrossingReport r = analytic;
  r.witnesses = witnesses;
  r.gap_min_re = witnesses.empty() ? min_re : 0.0;
  r.gap_min_im = witnesses.empty() ? min_im : 0.0;
  return r;
}

}  // namespace berryline
