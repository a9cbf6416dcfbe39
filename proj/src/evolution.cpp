#include "berryline/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "berryline/errors.hpp"

namespace berryline {
namespace {

constexpr cplx minus_i{0.0, -1.0};

Vec2 rhs(const Matrix2& h, const Vec2& psi) { return minus_i * (h * psi); }

}  // namespace

double Schedule::alpha(double t) const {
  if (path) return path(t);
  if (t == period_t) return alpha0 + loop_period;
  return alpha0 + loop_period * (t / period_t);
}

void Schedule::validate() const {
  if (!(period_t > 0.0) || !std::isfinite(period_t)) throw InvalidArgument("cycle time T must be positive");
  if (steps < 1000) throw InvalidArgument("schedule needs at least 1000 steps");
  if (static_cast<double>(steps) / period_t < 10.0) throw InvalidArgument("schedule needs at least 10 steps per unit time");
  if (path) {
    const double closure = path(period_t) - path(0.0) - loop_period;
    if (std::abs(closure) > 1e-12 * std::max(1.0, std::abs(loop_period)))
      throw InvalidArgument("schedule path must advance by exactly one loop period");
  }
}

Schedule Schedule::linear(double period_t, std::size_t steps, double alpha0, double loop_period) {
  Schedule s;
  s.period_t = period_t;
  s.steps = steps;
  s.alpha0 = alpha0;
  s.loop_period = loop_period;
  return s;
}

Schedule Schedule::with_density(double period_t, double steps_per_unit_time, double alpha0, double loop_period) {
  const double want = std::ceil(period_t * steps_per_unit_time);
  return linear(period_t, static_cast<std::size_t>(std::max(1000.0, want)), alpha0, loop_period);
}

EvolvedState evolve(const LoopModel& model, const Schedule& schedule, const Vec2& psi0, bool dual,
                    const EvolutionObserver& observer) {
  schedule.validate();
  const double n0 = norm(psi0);
  if (!(n0 > 0.0) || !is_finite(psi0)) throw InvalidArgument("initial state must be finite and nonzero");

  auto hamiltonian = [&](double t) {
    const Matrix2 h = model.hamiltonian(schedule.alpha(t));
    return dual ? adjoint(h) : h;
  };

  EvolvedState st;
  st.psi = (1.0 / n0) * psi0;
  st.log_norm = std::log(n0);
  if (observer) observer(0, 0.0, st.psi, st.log_norm);

  const double dt = schedule.period_t / static_cast<double>(schedule.steps);
  Matrix2 h_start = hamiltonian(0.0);
  for (std::size_t n = 0; n < schedule.steps; ++n) {
    const double t = schedule.period_t * static_cast<double>(n) / static_cast<double>(schedule.steps);
    const double t_end = schedule.period_t * static_cast<double>(n + 1) / static_cast<double>(schedule.steps);
    const Matrix2 h_mid = hamiltonian(0.5 * (t + t_end));
    const Matrix2 h_end = hamiltonian(t_end);
    const Vec2& y = st.psi;
    const Vec2 k1 = rhs(h_start, y);
    const Vec2 k2 = rhs(h_mid, y + (0.5 * dt) * k1);
    const Vec2 k3 = rhs(h_mid, y + (0.5 * dt) * k2);
    const Vec2 k4 = rhs(h_end, y + dt * k3);
    const Vec2 next = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    const double growth = norm(next);
    if (!(growth <= 10.0) || !(growth > 0.0))
      throw StepTooLarge("local growth factor " + std::to_string(growth) + " at step " + std::to_string(n), n);
    st.psi = (1.0 / growth) * next;
    st.log_norm += std::log(growth);
    h_start = h_end;
    if (observer) observer(n + 1, t_end, st.psi, st.log_norm);
  }
  return st;
}

EvolutionReport adiabatic_decomposition(const LoopModel& model, const Schedule& schedule, Band band,
                                        std::size_t berry_samples) {
  schedule.validate();
  const int b = index_of(band);
  const int o = 1 - b;
  const auto ub = static_cast<std::size_t>(b), uo = static_cast<std::size_t>(o);
  const bool detect = model.bipartite_params() == nullptr;

  const ParameterLoop loop = uniform_loop(schedule.alpha(0.0), schedule.loop_period, berry_samples);
  const BerryPhaseResult berry = global_berry_phase(loop, model);
  const LoopFrames lf = loop_frames(loop, model, detect);
  const cplx gamma_g = berry.gamma(band);

  TrackOptions opt;
  opt.gauge = Gauge::symmetric;
  opt.detect_interpolated_crossing = detect;
  FrameTracker tracker(opt);

  const Vec2 psi0 = lf.frame(0).right[ub];
  double arg_total = 0.0;
  cplx previous_c{};
  double log_c0 = 0.0;
  double log_c = 0.0;
  cplx energy_integral{};
  double max_split = 0.0;
  double leakage = 0.0;
  const double dt = schedule.period_t / static_cast<double>(schedule.steps);

  auto observe = [&](std::size_t step, double t, const Vec2& psi, double log_norm) {
    const double a = schedule.alpha(t);
    const EigenSystem& f = tracker.push(model.hamiltonian(a));
    const cplx u = lf.half_winding(b, a);
    const cplx c = std::conj(u) * inner(f.left[ub], psi);
    const cplx c_other = std::conj(lf.half_winding(o, a)) * inner(f.left[uo], psi);
    const double w = (step == 0 || step == schedule.steps) ? 0.5 : 1.0;
    energy_integral += w * dt * f.values[ub];
    max_split = std::max(max_split, 0.5 * std::abs((f.values[0] - f.values[1]).imag()));
    if (step == 0) {
      log_c0 = std::log(std::abs(c)) + log_norm;
    } else {
      arg_total += std::arg(c / previous_c);
    }
    previous_c = c;
    log_c = std::log(std::abs(c)) + log_norm;
    if (step == schedule.steps) leakage = std::abs(c_other / c);
  };

  const EvolvedState st = evolve(model, schedule, psi0, false, observe);

  EvolutionReport rep;
  rep.psi_final = st.psi;
  rep.log_norm = st.log_norm;
  rep.steps = schedule.steps;
  rep.total_phase = {arg_total, -(log_c - log_c0)};
  const cplx gamma_d = -energy_integral;
  rep.gamma_d = gamma_d.real();
  rep.xi_d = gamma_d.imag();
  rep.gamma_g = gamma_g.real();
  rep.xi_g = gamma_g.imag();
  rep.defect = std::abs(rep.total_phase - (gamma_d + gamma_g));
  rep.leakage = leakage;
  rep.regime = max_split * schedule.period_t / (2 * pi) > 50.0 ? Regime::strong : Regime::weak;
  if (leakage > 0.1)
    throw BandLeakage("band amplitude ratio " + std::to_string(leakage) + " exceeds 0.1 (adiabaticity broken)");
  return rep;
}

}  // namespace berryline
