#include "berryline/berry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "berryline/errors.hpp"
#include "berryline/kernels.hpp"
#include "berryline/spectrum.hpp"

namespace berryline {
namespace {

constexpr cplx I{0.0, 1.0};

cplx row_apply(const Vec2& row, const Matrix2& m, const Vec2& ket) {
  const Vec2 mk = m * ket;
  return row[0] * mk[0] + row[1] * mk[1];
}

cplx row_dot(const Vec2& row, const Vec2& ket) { return row[0] * ket[0] + row[1] * ket[1]; }

double sinc(double x) { return x == 0.0 ? 1.0 : std::sin(x) / x; }

// Fourth-order central difference of a periodic sequence at index i.
template <typename Get>
auto periodic_derivative(std::size_t n, std::size_t i, double h, Get get) {
  const std::size_t im2 = (i + n - 2) % n, im1 = (i + n - 1) % n;
  const std::size_t ip1 = (i + 1) % n, ip2 = (i + 2) % n;
  return (1.0 / (12.0 * h)) * (get(im2) - 8.0 * get(im1) + 8.0 * get(ip1) - get(ip2));
}

Vec2 scaled(const Vec2& v, cplx s) { return s * v; }

// Per-resolution evaluation of the eigenframe route.
struct Level {
  std::array<cplx, 2> gamma{};
  cplx trace{};
  double wilson = 0.0;
  bool guard_ok = true;
};

Level evaluate_frames(const ParameterLoop& loop, const LoopModel& model, bool detect) {
  const LoopFrames lf = loop_frames(loop, model, detect);
  const auto a = analytic_connection(lf, model);
  const double h = lf.step();
  Level lv;
  for (const auto& sample : a) {
    lv.gamma[0] += sample.a(0, 0);
    lv.gamma[1] += sample.a(1, 1);
  }
  lv.gamma[0] *= h;
  lv.gamma[1] *= h;
  lv.trace = lv.gamma[0] + lv.gamma[1];

  // Overlap determinants telescope; the half-windings cancel in det because
  // the two bands carry opposite phases.
  const std::size_t n = lf.size();
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const EigenSystem& cur = lf.raw[i];
    const EigenSystem& nxt = lf.raw[(i + 1) % n];
    Matrix2 m;
    for (int r = 0; r < 2; ++r)
      for (int c = 0; c < 2; ++c) m(r, c) = inner(nxt.left[static_cast<std::size_t>(r)], cur.right[static_cast<std::size_t>(c)]);
    const double step = std::arg(det(m));
    if (std::abs(step) >= pi / 2) lv.guard_ok = false;
    total += step;
  }
  lv.wilson = total / (2 * pi);
  return lv;
}

// Discrete winding number of a sampled closed curve; guard flags large steps.
double discrete_winding(const std::vector<cplx>& z, bool& guard_ok) {
  double total = 0.0;
  const std::size_t n = z.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double step = std::arg(z[(i + 1) % n] / z[i]);
    if (std::abs(step) >= pi / 2) guard_ok = false;
    total += step;
  }
  return total / (2 * pi);
}

void theta_prime_at(const std::vector<double>& ks, const kernels::BipartiteScalars& sc, std::vector<double>& out) {
  const std::size_t n = ks.size();
  std::vector<double> c(n), s(n), cre(n), cim(n), sre(n), sim(n), chi(n);
  out.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    c[i] = std::cos(ks[i]);
    s[i] = std::sin(ks[i]);
  }
  kernels::connection_terms(c, s, sc, {out, cre, cim, sre, sim, chi});
}

// Integral of theta'_k / sqrt(S) over one side of the EP pair, where
// |radicand| = S (k-a)(b-k) and k = c - r cos t removes the endpoint singularity.
double chebyshev_side(double center, double half_width, std::size_t n, const kernels::BipartiteScalars& sc) {
  std::vector<double> ks(n + 1), sfac(n + 1), tp;
  for (std::size_t j = 0; j <= n; ++j) {
    const double t = pi * static_cast<double>(j) / static_cast<double>(n);
    const double s = std::sin(0.5 * t), c = std::cos(0.5 * t);
    ks[j] = center - half_width * std::cos(t);
    sfac[j] = sc.v * sc.v_prime * sinc(half_width * s * s) * sinc(half_width * c * c);
  }
  theta_prime_at(ks, sc, tp);
  double sum = 0.0;
  for (std::size_t j = 0; j <= n; ++j) {
    const double w = (j == 0 || j == n) ? 0.5 : 1.0;
    sum += w * tp[j] / std::sqrt(sfac[j]);
  }
  return sum * pi / static_cast<double>(n);
}

// Gapless bipartite loop: the loop passes the exceptional points k = +-k*.
Level evaluate_through_eps(const BipartiteParams& p, std::size_t n) {
  const auto sc = kernels::BipartiteScalars::make(p.v, p.v_prime, p.gamma);
  const double cstar = std::clamp((p.gamma * p.gamma - sc.hop_sum) / sc.hop_cross, -1.0, 1.0);
  const double kstar = std::acos(cstar);

  const ParameterLoop loop = standard_loop(LoopKind::bipartite_brillouin, n);
  std::vector<double> tp;
  theta_prime_at(loop.samples, sc, tp);
  double trace = 0.0;
  for (double x : tp) trace += x;
  trace *= loop.step();

  // cos chi = i Gamma / sqrt(rad): imaginary where rad > 0 (|k| < k*), real beyond.
  const double inner_side = kstar > 0.0 ? p.gamma * chebyshev_side(0.0, kstar, n, sc) : 0.0;
  const double outer_side = kstar < pi ? p.gamma * chebyshev_side(pi, pi - kstar, n, sc) : 0.0;
  const cplx cos_term{outer_side, inner_side};

  Level lv;
  lv.gamma[0] = 0.5 * (trace + cos_term);
  lv.gamma[1] = 0.5 * (trace - cos_term);
  lv.trace = trace;

  std::vector<cplx> h12(n), h21(n);
  for (std::size_t i = 0; i < n; ++i) {
    h12[i] = bipartite_vk(p, loop.samples[i]);
    h21[i] = std::conj(h12[i]);
  }
  bool guard = true;
  lv.wilson = -0.5 * (discrete_winding(h12, guard) - discrete_winding(h21, guard));
  lv.guard_ok = guard;
  return lv;
}

}  // namespace

cplx LoopFrames::half_winding(int band, double a) const {
  if (!antiperiodic) return 1.0;
  const double sigma = band == 0 ? 1.0 : -1.0;
  return std::polar(1.0, sigma * pi * (a - alpha.front()) / period);
}

EigenSystem LoopFrames::frame(std::size_t i) const {
  EigenSystem es = raw[i];
  if (!antiperiodic) return es;
  for (int s = 0; s < 2; ++s) {
    const cplx u = half_winding(s, alpha[i]);
    es.right[static_cast<std::size_t>(s)] = scaled(es.right[static_cast<std::size_t>(s)], u);
    es.left[static_cast<std::size_t>(s)] = scaled(es.left[static_cast<std::size_t>(s)], u);
  }
  return es;
}

LoopFrames loop_frames(const ParameterLoop& loop, const LoopModel& model, bool detect_crossings) {
  if (loop.size() < 4) throw BadResolution("loop needs at least four samples");
  TrackOptions opt;
  opt.gauge = Gauge::symmetric;
  opt.detect_interpolated_crossing = detect_crossings;
  FrameTracker tracker(opt);

  LoopFrames lf;
  lf.alpha = loop.samples;
  lf.period = loop.period;
  lf.raw.reserve(loop.size());
  for (double a : loop.samples) lf.raw.push_back(tracker.push(model.hamiltonian(a)));
  lf.reference = tracker.reference_components();

  const EigenSystem closing = tracker.push(model.hamiltonian(loop.start() + loop.period));
  const EigenSystem& first = lf.raw.front();
  std::array<double, 2> sign{};
  for (int s = 0; s < 2; ++s) {
    const auto u = static_cast<std::size_t>(s);
    if (frame_fidelity(first, s, closing, s) < 0.99)
      throw BandExchange("bands exchange around the loop", loop.size());
    sign[u] = std::real(inner(first.left[u], closing.right[u]));
  }
  if ((sign[0] < 0.0) != (sign[1] < 0.0))
    throw SingularLoop("symmetric gauge closes with mixed periodicity", loop.size());
  lf.antiperiodic = sign[0] < 0.0;
  return lf;
}

std::vector<ConnectionSample> analytic_connection(const LoopFrames& lf, const LoopModel& model) {
  const std::size_t n = lf.size();
  std::vector<ConnectionSample> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const EigenSystem& f = lf.raw[i];
    const Matrix2 dh = model.derivative(lf.alpha[i]);
    Matrix2 a;
    for (int s = 0; s < 2; ++s) {
      const int o = 1 - s;
      const auto us = static_cast<std::size_t>(s), uo = static_cast<std::size_t>(o);
      const Vec2 ls = f.dual_row(s), lo = f.dual_row(o);
      const Vec2& ps = f.right[us];
      const Vec2& po = f.right[uo];
      const cplx gap = f.values[us] - f.values[uo];
      const cplx c_os = row_apply(lo, dh, ps) / gap;  // <lambda_o|d psi_s>
      const cplx d_s = row_apply(ls, dh, po) / gap;   // (d<lambda_s|) psi_o
      const int r = lf.reference[us];
      const cplx a_s = (d_s * lo[r] - c_os * po[r]) / (2.0 * ps[r]);
      a(s, s) = I * a_s;
      a(o, s) = I * c_os;
      if (lf.antiperiodic) {
        const double sigma = s == 0 ? 1.0 : -1.0;
        a(s, s) -= sigma * pi / lf.period;
        a(o, s) *= lf.half_winding(s, lf.alpha[i]) / lf.half_winding(o, lf.alpha[i]);
      }
    }
    out[i] = {lf.alpha[i], a};
  }
  return out;
}

std::vector<ConnectionSample> fd_connection(const std::vector<double>& alpha, double period,
                                            const std::vector<EigenSystem>& frames) {
  const std::size_t n = frames.size();
  const double h = period / static_cast<double>(n);
  std::vector<ConnectionSample> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    Matrix2 a;
    for (int s = 0; s < 2; ++s) {
      const auto us = static_cast<std::size_t>(s);
      const Vec2 d = periodic_derivative(n, i, h, [&](std::size_t j) { return frames[j].right[us]; });
      for (int o = 0; o < 2; ++o) a(o, s) = I * row_dot(frames[i].dual_row(o), d);
    }
    out[i] = {alpha[i], a};
  }
  return out;
}

std::vector<ConnectionSample> connection_samples(const ParameterLoop& loop, const LoopModel& model,
                                                 ConnectionMethod method) {
  const LoopFrames lf = loop_frames(loop, model);
  if (method == ConnectionMethod::analytic_derivative) return analytic_connection(lf, model);
  std::vector<EigenSystem> frames(lf.size());
  for (std::size_t i = 0; i < lf.size(); ++i) frames[i] = lf.frame(i);
  return fd_connection(lf.alpha, lf.period, frames);
}

std::vector<ConnectionSample> bipartite_closed_connection(const ParameterLoop& loop, const BipartiteParams& p) {
  p.validate();
  const std::size_t n = loop.size();
  const auto sc = kernels::BipartiteScalars::make(p.v, p.v_prime, p.gamma);
  std::vector<double> c(n), s(n), tp(n), cre(n), cim(n), sre(n), sim(n), chi(n);
  for (std::size_t i = 0; i < n; ++i) {
    c[i] = std::cos(loop.samples[i]);
    s[i] = std::sin(loop.samples[i]);
  }
  kernels::connection_terms(c, s, sc, {tp, cre, cim, sre, sim, chi});
  std::vector<ConnectionSample> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const cplx cos_chi{cre[i], cim[i]};
    const cplx sin_chi{sre[i], sim[i]};
    const cplx dchi{0.0, chi[i]};
    Matrix2 a;
    a(0, 0) = 0.5 * (1.0 + cos_chi) * tp[i];
    a(1, 1) = 0.5 * (1.0 - cos_chi) * tp[i];
    a(0, 1) = -0.5 * sin_chi * tp[i] - 0.5 * I * dchi;
    a(1, 0) = -0.5 * sin_chi * tp[i] + 0.5 * I * dchi;
    out[i] = {loop.samples[i], a};
  }
  return out;
}

std::optional<int> analytic_q(const TwoLevelParams& p) {
  if (p.is_singular()) return std::nullopt;
  const auto sgn = [](double x) { return x > 0.0 ? 1 : -1; };
  const int w = sgn((p.hx + p.dx) * (p.hy + p.dy)) + sgn((p.hx - p.dx) * (p.hy - p.dy));
  return w / 2;
}

std::optional<int> analytic_q(const BipartiteParams& p) {
  const double q = p.q();
  if (std::abs(q - 1.0) <= 1e-12) return std::nullopt;
  return q > 1.0 ? 1 : 0;
}

bool near_critical(const BipartiteParams& p) {
  const double q = p.q(), eta = p.eta();
  return std::abs(eta - (q + 1.0)) < 1e-3 || std::abs(eta - std::abs(q - 1.0)) < 1e-3 || std::abs(q - 1.0) < 1e-3;
}

BerryPhaseResult global_berry_phase(const ParameterLoop& loop, const LoopModel& model, RefinementOptions options) {
  BerryPhaseResult res;
  const BipartiteParams* bp = model.bipartite_params();
  bool through_eps = false;
  if (const TwoLevelParams* tp = model.two_level_params(); tp && tp->is_singular())
    throw SingularLoop("two-level parameters on the singular set |Delta| = |h|");
  if (bp) {
    if (!analytic_q(*bp)) throw SingularLoop("bipartite loop at q = 1 passes v_k = 0");
    res.near_critical = near_critical(*bp);
    through_eps = classify_region(bp->q(), bp->eta()).region == Region::gapless_true_crossing;
  }
  res.through_exceptional_points = through_eps;

  ParameterLoop current = loop;
  std::optional<Level> previous;
  Level lv;
  bool converged = false;
  for (;;) {
    const std::size_t n = current.size();
    bool evaluated = true;
    try {
      lv = through_eps ? evaluate_through_eps(*bp, n) : evaluate_frames(current, model, bp == nullptr);
    } catch (const PathTooCoarse&) {
      if (n >= options.max_samples) throw;
      evaluated = false;
    }
    if (evaluated) {
      res.refinement_history.emplace_back(n, lv.trace.real() / (2 * pi));
      res.band_history.emplace_back(n, lv.gamma);
      if (previous && lv.guard_ok && std::abs(lv.gamma[0] - previous->gamma[0]) < options.tolerance &&
          std::abs(lv.gamma[1] - previous->gamma[1]) < options.tolerance) {
        converged = true;
        break;
      }
      previous = lv;
    }
    if (n >= options.max_samples) break;
    current = refine(current);
  }

  res.resolution = current.size();
  res.gamma_b_plus = lv.gamma[0].real();
  res.xi_b_plus = lv.gamma[0].imag();
  res.gamma_b_minus = lv.gamma[1].real();
  res.xi_b_minus = lv.gamma[1].imag();
  res.q_index = lv.trace.real() / (2 * pi);
  res.q_index_imag = lv.trace.imag() / (2 * pi);
  res.q_wilson = lv.wilson;

  std::vector<std::pair<std::size_t, double>> history = res.refinement_history;
  if (!converged) {
    res.failure = "refinement did not converge up to " + std::to_string(options.max_samples) + " samples";
    if (options.throw_on_failure) throw NotConverged(res.failure, history);
    return res;
  }
  if (std::abs(res.q_index - res.q_wilson) > 1e-6) {
    res.failure = "trace quadrature and overlap-determinant Q disagree";
    if (options.throw_on_failure) throw Disagreement(res.failure);
    return res;
  }
  const double nearest = std::round(res.q_index);
  if (std::abs(res.q_index - nearest) < 1e-6) res.q_rounded = static_cast<int>(nearest);
  res.converged = true;
  return res;
}

cplx band_berry_phase(const ParameterLoop& loop, const LoopModel& model, Band band, RefinementOptions options) {
  return global_berry_phase(loop, model, options).gamma(band);
}

GaugeReport apply_gauge(const LoopFrames& lf, const GaugeTransform& g) {
  const std::size_t n = lf.size();
  const double h = lf.step();
  const double a0 = lf.alpha.front();
  auto f_at = [&](int s, double a) {
    const auto& fn = g.f[static_cast<std::size_t>(s)];
    return fn ? fn(a) : 0.0;
  };
  for (int s = 0; s < 2; ++s) {
    const double measured = (f_at(s, a0 + lf.period) - f_at(s, a0)) / (2 * pi);
    if (std::abs(measured - g.windings[static_cast<std::size_t>(s)]) > 1e-6)
      throw GaugeMismatch("declared winding " + std::to_string(g.windings[static_cast<std::size_t>(s)]) +
                          " but f advances by " + std::to_string(measured) + " x 2pi");
  }

  GaugeReport rep;
  std::vector<EigenSystem> before(n);
  rep.transformed.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    before[i] = lf.frame(i);
    rep.transformed[i] = before[i];
    for (int s = 0; s < 2; ++s) {
      const auto u = static_cast<std::size_t>(s);
      const cplx phase = std::polar(1.0, -f_at(s, lf.alpha[i]));
      rep.transformed[i].right[u] = scaled(before[i].right[u], phase);
      rep.transformed[i].left[u] = scaled(before[i].left[u], phase);
    }
  }
  rep.a_before = fd_connection(lf.alpha, lf.period, before);
  rep.a_after = fd_connection(lf.alpha, lf.period, rep.transformed);

  cplx tr_before{}, tr_after{};
  for (std::size_t i = 0; i < n; ++i) {
    const double a = lf.alpha[i];
    for (int s = 0; s < 2; ++s) {
      const auto u = static_cast<std::size_t>(s);
      double df = 0.0;
      if (g.df[u]) {
        df = g.df[u](a);
      } else if (g.f[u]) {
        df = (f_at(s, a - 2 * h) - 8.0 * f_at(s, a - h) + 8.0 * f_at(s, a + h) - f_at(s, a + 2 * h)) / (12.0 * h);
      }
      const cplx diff = rep.a_after[i].a(s, s) - rep.a_before[i].a(s, s) - df;
      rep.connection_error = std::max(rep.connection_error, std::abs(diff));
      rep.gamma_before[u] += h * rep.a_before[i].a(s, s);
      rep.gamma_after[u] += h * rep.a_after[i].a(s, s);
    }
    tr_before += h * trace(rep.a_before[i].a);
    tr_after += h * trace(rep.a_after[i].a);
  }
  for (int s = 0; s < 2; ++s) {
    const auto u = static_cast<std::size_t>(s);
    rep.phase_error = std::max(rep.phase_error, std::abs(rep.gamma_after[u] - rep.gamma_before[u] - 2 * pi * g.windings[u]));
  }
  rep.q_before = tr_before.real() / (2 * pi);
  rep.q_after = tr_after.real() / (2 * pi);
  rep.q_error = std::abs(rep.q_after - rep.q_before - (g.windings[0] + g.windings[1]));
  return rep;
}

double first_order_correction_trace(const ParameterLoop& loop, const LoopModel& model) {
  const LoopFrames lf = loop_frames(loop, model);
  const std::size_t n = lf.size();
  const double h = lf.step();
  std::vector<EigenSystem> frames(n);
  for (std::size_t i = 0; i < n; ++i) frames[i] = lf.frame(i);

  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    std::array<Vec2, 2> dpsi, drow;
    for (int s = 0; s < 2; ++s) {
      const auto u = static_cast<std::size_t>(s);
      dpsi[u] = periodic_derivative(n, i, h, [&](std::size_t j) { return frames[j].right[u]; });
      drow[u] = periodic_derivative(n, i, h, [&](std::size_t j) { return frames[j].dual_row(s); });
    }
    const EigenSystem& f = frames[i];
    const cplx gap = f.values[0] - f.values[1];
    const cplx t1 = row_dot(drow[0], f.right[1]) * row_dot(f.dual_row(1), dpsi[0]);
    const cplx t2 = row_dot(drow[1], f.right[0]) * row_dot(f.dual_row(0), dpsi[1]);
    worst = std::max(worst, std::abs(I / gap * (t1 - t2)));
  }
  return worst;
}

}  // namespace berryline
