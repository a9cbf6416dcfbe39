#include <doctest.h>

#include <cmath>
#include <random>

#include "berryline/berry.hpp"
#include "berryline/elliptic.hpp"
#include "berryline/errors.hpp"
#include "oracles.hpp"

using namespace berryline;

namespace {

ParameterLoop two_level_loop(std::size_t n = 256) { return standard_loop(LoopKind::two_level_azimuthal, n); }
ParameterLoop bz_loop(std::size_t n = 256) { return standard_loop(LoopKind::bipartite_brillouin, n); }

TwoLevelParams random_off_singular(std::mt19937_64& rng, double margin) {
  for (;;) {
    TwoLevelParams p;
    p.hx = oracle::uniform(rng, 0.3, 2);
    p.hy = oracle::uniform(rng, 0.3, 2);
    p.hz = oracle::uniform(rng, -1.5, 1.5);
    p.dx = oracle::uniform(rng, -3, 3);
    p.dy = oracle::uniform(rng, -3, 3);
    p.dz = oracle::uniform(rng, -0.5, 0.5);
    p.theta = oracle::uniform(rng, 0.2, pi - 0.2);
    if (std::abs(std::abs(p.dx) - p.hx) > margin && std::abs(std::abs(p.dy) - p.hy) > margin) return p;
  }
}

// Gapless bipartite phases by tanh-sinh quadrature of cos(chi) theta' on both
// sides of the exceptional point (principal branch of the square root).
std::array<cplx, 2> gapless_oracle(double q, double eta) {
  auto theta_prime = [=](double k) { return q * (q + std::cos(k)) / (1 + q * q + 2 * q * std::cos(k)); };
  const double kstar = std::acos(std::clamp((eta * eta - 1 - q * q) / (2 * q), -1.0, 1.0));
  // |radicand| = 4q sin(|k - k*|/2) sin((k + k*)/2), with the endpoint distance taken exactly.
  auto inv_sqrt_rad = [=](double k, double d) { return 1.0 / std::sqrt(4 * q * std::sin(d / 2) * std::sin((kstar + k) / 2)); };
  boost::math::quadrature::tanh_sinh<double> ts;
  const double inner = kstar > 0 ? ts.integrate([&](double k, double xc) {
    return theta_prime(k) * inv_sqrt_rad(k, xc > 0 ? xc : kstar - k);
  }, 0.0, kstar) : 0.0;
  const double outer = kstar < pi ? ts.integrate([&](double k, double xc) {
    return theta_prime(k) * inv_sqrt_rad(k, xc < 0 ? -xc : k - kstar);
  }, kstar, pi) : 0.0;
  const cplx loop_cos = 2.0 * eta * cplx(outer, inner);
  const double winding = q > 1 ? 2 * pi : 0.0;
  return {0.5 * (winding + loop_cos), 0.5 * (winding - loop_cos)};
}

}  // namespace

TEST_CASE("constant Hamiltonian has zero connection") {
  const Matrix2 h{cplx(0.3, 0.1), 0.7, cplx(0.2, -0.4), -0.5};
  const LoopModel m([h](double) { return h; }, [](double) { return Matrix2::zero(); });
  for (auto method : {ConnectionMethod::finite_difference, ConnectionMethod::analytic_derivative})
    for (const auto& s : connection_samples(two_level_loop(64), m, method))
      for (const auto& z : s.a.m) CHECK(std::abs(z) < 1e-14);
}

TEST_CASE("Hermitian h_x = h_y connection matches the closed-form diagonal") {
  TwoLevelParams p{1.2, 1.2, 0.7, 0.0, 0.0, 0.0, 1.0};
  const double tan_chi = 1.2 / 0.7 * std::tan(1.0);
  const double cos_chi = 1.0 / std::sqrt(1.0 + tan_chi * tan_chi);
  // nu^- = phi, rho = 1, so A^+ = cos^2(chi/2) and A^- = sin^2(chi/2) per unit phi.
  for (auto method : {ConnectionMethod::finite_difference, ConnectionMethod::analytic_derivative}) {
    const auto a = connection_samples(two_level_loop(256), LoopModel::two_level(p), method);
    for (const auto& s : a) {
      CHECK(std::abs(s.a(0, 0) - 0.5 * (1 + cos_chi)) < 1e-8);
      CHECK(std::abs(s.a(1, 1) - 0.5 * (1 - cos_chi)) < 1e-8);
    }
  }
}

TEST_CASE("bipartite connection matches the sigma decomposition") {
  const BipartiteParams p = BipartiteParams::from_ratios(2.0, 0.5);
  const ParameterLoop loop = bz_loop(4096);
  const auto closed = bipartite_closed_connection(loop, p);
  const auto analytic = connection_samples(loop, LoopModel::bipartite(p), ConnectionMethod::analytic_derivative);
  const auto fd = connection_samples(loop, LoopModel::bipartite(p), ConnectionMethod::finite_difference);
  REQUIRE(closed.size() == analytic.size());
  for (std::size_t i = 0; i < closed.size(); ++i) {
    CHECK(std::abs(analytic[i].a(0, 0) - closed[i].a(0, 0)) < 1e-10);
    CHECK(std::abs(analytic[i].a(1, 1) - closed[i].a(1, 1)) < 1e-10);
    // Off-diagonal entries depend on the relative sign of the two band vectors.
    const cplx ratio01 = analytic[i].a(0, 1) / closed[i].a(0, 1);
    const cplx ratio10 = analytic[i].a(1, 0) / closed[i].a(1, 0);
    CHECK(std::abs(std::abs(ratio01.real()) - 1.0) < 1e-9);
    CHECK(std::abs(ratio01 - ratio10) < 1e-9);
    CHECK(max_abs_diff(analytic[i].a, fd[i].a) < 1e-8);
  }
}

TEST_CASE("analytic and finite-difference connections agree on two-level loops") {
  std::mt19937_64 rng(21);
  for (int t = 0; t < 10; ++t) {
    const TwoLevelParams p = random_off_singular(rng, 0.2);
    const ParameterLoop loop = two_level_loop(16384);
    const LoopModel m = LoopModel::two_level(p);
    const auto a = connection_samples(loop, m, ConnectionMethod::analytic_derivative);
    const auto f = connection_samples(loop, m, ConnectionMethod::finite_difference);
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, max_abs_diff(a[i].a, f[i].a));
    CHECK(worst < 1e-8);
  }
}

TEST_CASE("bipartite band phases at eta = 0") {
  const cplx g2 = band_berry_phase(bz_loop(), LoopModel::bipartite(BipartiteParams::from_ratios(2.0, 0.0)), Band::plus);
  CHECK(g2.real() == doctest::Approx(pi).epsilon(1e-12));
  CHECK(std::abs(g2.imag()) < 1e-12);
  const cplx g05 = band_berry_phase(bz_loop(), LoopModel::bipartite(BipartiteParams::from_ratios(0.5, 0.0)), Band::minus);
  CHECK(std::abs(g05) < 1e-12);
}

TEST_CASE("Hermitian two-level band phase is pi(1 + cos chi)") {
  for (double theta : {0.4, 1.0, 2.2}) {
    TwoLevelParams p{0.8, 0.8, 0.5, 0.0, 0.0, 0.0, theta};
    const double tan_chi = 0.8 / 0.5 * std::tan(theta);
    double cos_chi = 1.0 / std::sqrt(1.0 + tan_chi * tan_chi);
    if (std::cos(theta) < 0) cos_chi = -cos_chi;
    const cplx g = band_berry_phase(two_level_loop(), LoopModel::two_level(p), Band::plus);
    CHECK(g.real() == doctest::Approx(pi * (1 + cos_chi)).epsilon(1e-10));
    CHECK(std::abs(g.imag()) < 1e-10);
  }
}

TEST_CASE("two-level band phases against the dense closed-form connection") {
  // Parameters where nu^+ does not wind, so the closed-form frames are periodic.
  for (TwoLevelParams p : {TwoLevelParams{1.0, 1.0, 2.0, 0.5, 0.3, 0.2, pi / 3},
                           TwoLevelParams{1.0, 1.0, 2.5, 2.0, 2.0, 0.3, 0.8},
                           TwoLevelParams{1.0, 1.0, 0.7, 0.0, 0.0, 0.0, 1.2}}) {
    const auto ref = oracle::two_level_dense_phases(p, std::size_t{1} << 16);
    const BerryPhaseResult r = global_berry_phase(two_level_loop(), LoopModel::two_level(p));
    CHECK(std::abs(r.gamma(Band::plus) - ref[0]) < 1e-7);
    CHECK(std::abs(r.gamma(Band::minus) - ref[1]) < 1e-7);
  }
}

TEST_CASE("bipartite contour phases match the elliptic closed form") {
  for (auto [q, eta] : {std::pair{0.5, 0.2}, {2.0, 0.5}, {3.0, 1.5}, {0.3, 0.6}, {1.5, 0.1}}) {
    const LoopModel m = LoopModel::bipartite(BipartiteParams::from_ratios(q, eta));
    for (Band b : {Band::plus, Band::minus})
      CHECK(std::abs(band_berry_phase(bz_loop(), m, b) - closed_form_gamma(q, eta, b)) < 1e-9);
  }
  const cplx g = band_berry_phase(bz_loop(), LoopModel::bipartite(BipartiteParams::from_ratios(0.5, 0.2)), Band::plus);
  CHECK(g.imag() == doctest::Approx(-0.12131964895404723).epsilon(1e-9));
}

TEST_CASE("gapless bipartite phases match direct quadrature through the exceptional points") {
  for (auto [q, eta] : {std::pair{0.5, 1.0}, {1.0 + 0.3, 1.2}, {2.0, 2.0}, {0.8, 0.5}, {2.5, 3.0}}) {
    const BerryPhaseResult r = global_berry_phase(bz_loop(), LoopModel::bipartite(BipartiteParams::from_ratios(q, eta)));
    CHECK(r.through_exceptional_points);
    const auto ref = gapless_oracle(q, eta);
    CHECK(std::abs(r.gamma(Band::plus) - ref[0]) < 1e-8);
    CHECK(std::abs(r.gamma(Band::minus) - ref[1]) < 1e-8);
    CHECK(r.q_rounded == analytic_q(BipartiteParams::from_ratios(q, eta)));
  }
}

TEST_CASE("type II phases are real") {
  const BerryPhaseResult r = global_berry_phase(bz_loop(), LoopModel::bipartite(BipartiteParams::from_ratios(0.5, 2.0)));
  CHECK(std::abs(r.xi_b_plus) < 1e-10);
  CHECK(std::abs(r.xi_b_minus) < 1e-10);
  CHECK(std::abs(r.gamma_b_plus + r.gamma_b_minus) < 1e-10);
}

TEST_CASE("global index examples") {
  for (double theta : {0.3, 1.0, pi / 2, 2.5}) {
    const auto r = global_berry_phase(two_level_loop(), LoopModel::two_level({1, 1, 0.5, 2, 2, 0.2, theta}));
    CHECK(r.q_rounded == 1);
  }
  CHECK(global_berry_phase(two_level_loop(), LoopModel::two_level({1, 1, 0.5, 2, 0, 0.2, 1.0})).q_rounded == 0);
  CHECK(global_berry_phase(two_level_loop(), LoopModel::two_level({1, 1, 0.5, 0, 0, 0, 1.0})).q_rounded == 1);
  CHECK(global_berry_phase(bz_loop(), LoopModel::bipartite(BipartiteParams::from_ratios(0.5, 0.2))).q_rounded == 0);
  CHECK(global_berry_phase(bz_loop(), LoopModel::bipartite(BipartiteParams::from_ratios(2.0, 0.2))).q_rounded == 1);
}

TEST_CASE("singular loops are refused") {
  CHECK_THROWS_AS(global_berry_phase(two_level_loop(), LoopModel::two_level({1, 1, 0.5, 1, 2, 0, 1.0})), SingularLoop);
  CHECK_THROWS_AS(global_berry_phase(bz_loop(), LoopModel::bipartite(BipartiteParams::from_ratios(1.0, 0.5))), SingularLoop);
}

TEST_CASE("analytic index") {
  CHECK(analytic_q(TwoLevelParams{1, 1, 0, 2, 2, 0, 1.0}) == 1);
  CHECK(analytic_q(TwoLevelParams{1, 1, 0, 2, 0, 0, 1.0}) == 0);
  CHECK(analytic_q(TwoLevelParams{1, 1, 0, 0, 0, 0, 1.0}) == 1);
  CHECK_FALSE(analytic_q(TwoLevelParams{1, 1, 0, 1, 2, 0, 1.0}).has_value());
  CHECK_FALSE(analytic_q(BipartiteParams::from_ratios(1.0, 0.3)).has_value());
  CHECK(analytic_q(BipartiteParams::from_ratios(0.9, 0.3)) == 0);
  CHECK(analytic_q(BipartiteParams::from_ratios(1.1, 0.3)) == 1);
}

TEST_CASE("random two-level draws: quantized, matching, cross-checked") {
  std::mt19937_64 rng(23);
  for (int t = 0; t < 100; ++t) {
    const TwoLevelParams p = random_off_singular(rng, 0.05);
    const BerryPhaseResult r = global_berry_phase(two_level_loop(), LoopModel::two_level(p));
    REQUIRE(r.q_rounded.has_value());
    CHECK(std::abs(r.q_index - *r.q_rounded) < 1e-6);
    CHECK(r.q_rounded == analytic_q(p));
    CHECK(std::abs(r.q_index - r.q_wilson) < 1e-6);
    // Im Q is the loop integral of d ln rho, which closes.
    CHECK(std::abs(r.q_index_imag) < 1e-8);
    // Trace of A is the sum of the band connections.
    CHECK(std::abs(r.gamma(Band::plus) + r.gamma(Band::minus) - 2 * pi * cplx(r.q_index, r.q_index_imag)) < 1e-10);
  }
}

TEST_CASE("Hermitian loops have real phases") {
  std::mt19937_64 rng(29);
  for (int t = 0; t < 20; ++t) {
    TwoLevelParams p = random_off_singular(rng, 0.05);
    p.dx = p.dy = p.dz = 0.0;
    const BerryPhaseResult r = global_berry_phase(two_level_loop(), LoopModel::two_level(p));
    CHECK(std::abs(r.xi_b_plus) < 1e-8);
    CHECK(std::abs(r.xi_b_minus) < 1e-8);
    const BerryPhaseResult b =
        global_berry_phase(bz_loop(), LoopModel::bipartite(BipartiteParams::from_ratios(oracle::uniform(rng, 0.1, 3), 0.0)));
    CHECK(std::abs(b.xi_b_plus) < 1e-8);
    CHECK(std::abs(b.xi_b_minus) < 1e-8);
  }
}

TEST_CASE("refinement history records convergence") {
  const BerryPhaseResult r = global_berry_phase(two_level_loop(16), LoopModel::two_level({1, 0.6, 0.4, 0.3, 0.2, 0.1, 1.1}));
  CHECK(r.converged);
  REQUIRE(r.band_history.size() >= 2);
  const auto& last = r.band_history.back().second;
  const auto& prev = r.band_history[r.band_history.size() - 2].second;
  CHECK(std::abs(last[0] - prev[0]) < 1e-9);
  CHECK(r.refinement_history.size() == r.band_history.size());
}

TEST_CASE("resolution convergence is at least fourth order") {
  const LoopModel m = LoopModel::two_level({1, 0.6, 0.4, 0.3, 0.2, 0.1, 1.1});
  std::vector<cplx> g;
  for (std::size_t n = 16; n <= 256; n *= 2) {
    RefinementOptions o;
    o.max_samples = n;
    o.throw_on_failure = false;
    g.push_back(global_berry_phase(two_level_loop(n), m, o).gamma(Band::plus));
  }
  for (std::size_t i = 2; i < g.size(); ++i) {
    const double d_prev = std::abs(g[i - 1] - g[i - 2]);
    const double d = std::abs(g[i] - g[i - 1]);
    CHECK((d <= d_prev / 16 || d < 1e-13));
  }
}

TEST_CASE("nonconvergence is reported with history") {
  RefinementOptions o;
  o.max_samples = 16;
  o.tolerance = 1e-30;
  try {
    global_berry_phase(two_level_loop(16), LoopModel::two_level({1, 0.6, 0.4, 0.3, 0.2, 0.1, 1.1}), o);
    FAIL("expected NotConverged");
  } catch (const NotConverged& e) {
    CHECK_FALSE(e.history().empty());
  }
  o.throw_on_failure = false;
  const auto r = global_berry_phase(two_level_loop(16), LoopModel::two_level({1, 0.6, 0.4, 0.3, 0.2, 0.1, 1.1}), o);
  CHECK_FALSE(r.converged);
  CHECK_FALSE(r.failure.empty());
}

TEST_CASE("near-critical flag") {
  CHECK(near_critical(BipartiteParams::from_ratios(0.5, 0.5005)));
  CHECK(near_critical(BipartiteParams::from_ratios(0.5, 1.4999)));
  CHECK(near_critical(BipartiteParams::from_ratios(1.0005, 0.1)));
  CHECK_FALSE(near_critical(BipartiteParams::from_ratios(0.5, 0.2)));
}

TEST_CASE("gauge laws") {
  const ParameterLoop loop = two_level_loop(4096);
  const LoopFrames lf = loop_frames(loop, LoopModel::two_level({1, 1, 0.5, 2, 2, 0.2, 1.0}));

  SUBCASE("identity gauge") {
    const GaugeReport r = apply_gauge(lf, {});
    CHECK(r.connection_error == 0.0);
    CHECK(r.phase_error < 1e-12);
    CHECK(r.q_after == r.q_before);
  }
  SUBCASE("f = alpha on the plus band") {
    GaugeTransform g;
    g.f[0] = [](double a) { return a; };
    g.windings = {1, 0};
    const GaugeReport r = apply_gauge(lf, g);
    CHECK(std::abs(r.gamma_after[0] - r.gamma_before[0] - 2 * pi) < 1e-8);
    CHECK(std::abs(r.q_after - r.q_before - 1.0) < 1e-6);
    CHECK(r.connection_error < 1e-9);
  }
  SUBCASE("f = -2 alpha on both bands") {
    GaugeTransform g;
    g.f[0] = g.f[1] = [](double a) { return -2 * a; };
    g.df[0] = g.df[1] = [](double) { return -2.0; };
    g.windings = {-2, -2};
    const GaugeReport r = apply_gauge(lf, g);
    CHECK(std::abs(r.q_after - r.q_before + 4.0) < 1e-6);
    CHECK(r.phase_error < 1e-8);
  }
  SUBCASE("declared winding must match f") {
    GaugeTransform g;
    g.f[0] = [](double a) { return a; };
    g.windings = {2, 0};
    CHECK_THROWS_AS(apply_gauge(lf, g), GaugeMismatch);
  }
}

TEST_CASE("randomized windings with smooth periodic parts") {
  std::mt19937_64 rng(31);
  const LoopFrames two = loop_frames(two_level_loop(4096), LoopModel::two_level({1, 0.7, 0.4, 0.3, 2.0, 0.1, 1.2}));
  const LoopFrames bip = loop_frames(bz_loop(4096), LoopModel::bipartite(BipartiteParams::from_ratios(2.0, 0.5)));
  for (const LoopFrames* lf : {&two, &bip}) {
    const double a0 = lf->alpha.front(), period = lf->period;
    for (int t = 0; t < 8; ++t) {
      GaugeTransform g;
      for (std::size_t s = 0; s < 2; ++s) {
        const int n = std::uniform_int_distribution<int>(-3, 3)(rng);
        const double amp = oracle::uniform(rng, -1, 1);
        g.windings[s] = n;
        g.f[s] = [=](double a) { return 2 * pi * n * (a - a0) / period + amp * std::sin(a); };
        g.df[s] = [=](double a) { return 2 * pi * n / period + amp * std::cos(a); };
      }
      const GaugeReport r = apply_gauge(*lf, g);
      CHECK(r.connection_error < 1e-9);
      CHECK(r.phase_error < 1e-8);
      CHECK(r.q_error < 1e-6);
    }
  }
}

TEST_CASE("first-order correction has vanishing trace") {
  std::mt19937_64 rng(37);
  for (int t = 0; t < 10; ++t) {
    const TwoLevelParams p = random_off_singular(rng, 0.2);
    CHECK(first_order_correction_trace(two_level_loop(16384), LoopModel::two_level(p)) < 1e-8);
  }
  CHECK(first_order_correction_trace(two_level_loop(2048), LoopModel::two_level({1, 0.8, 0.5, 0, 0, 0, 1.0})) < 1e-8);
  CHECK(first_order_correction_trace(bz_loop(2048), LoopModel::bipartite(BipartiteParams::from_ratios(2.0, 0.5))) < 1e-8);
}
