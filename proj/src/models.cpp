#include "berryline/models.hpp"

#include <bit>
#include <cmath>
#include <utility>

#include "berryline/errors.hpp"

namespace berryline {
namespace {

constexpr double singular_tol = 1e-12;

bool finite_all(std::initializer_list<double> xs) {
  for (double x : xs)
    if (!std::isfinite(x)) return false;
  return true;
}

double sgn(double x) { return x < 0.0 ? -1.0 : 1.0; }

}  // namespace

bool TwoLevelParams::is_singular() const {
  return std::abs(std::abs(dx) - std::abs(hx)) <= singular_tol ||
         std::abs(std::abs(dy) - std::abs(hy)) <= singular_tol;
}

void TwoLevelParams::validate() const {
  if (!finite_all({hx, hy, hz, dx, dy, dz, theta}))
    throw InvalidArgument("two-level parameters must be finite");
  if (theta < 0.0 || theta > pi) throw InvalidArgument("theta must lie in [0, pi]");
}

double unwrapped_angle(double a, double b, double phi) {
  const double s = sgn(a * b);
  const double psi = s * phi;
  const double c = std::cos(psi);
  const double sn = std::sin(psi);
  const double base = a < 0.0 ? pi : 0.0;
  return base + psi +
         std::atan2((std::abs(b) - std::abs(a)) * sn * c, std::abs(a) * c * c + std::abs(b) * sn * sn);
}

Matrix2 two_level_hamiltonian(const TwoLevelParams& p, double phi) {
  const double c = std::cos(p.theta);
  const double s = std::sin(p.theta);
  const double cp = std::cos(phi);
  const double sp = std::sin(phi);
  const cplx z{p.hz, p.dz};
  const cplx h12{(p.hx + p.dx) * cp * s, -(p.hy + p.dy) * sp * s};
  const cplx h21{(p.hx - p.dx) * cp * s, (p.hy - p.dy) * sp * s};
  return {z * c, h12, h21, -z * c};
}

Matrix2 two_level_derivative(const TwoLevelParams& p, double phi) {
  const double s = std::sin(p.theta);
  const double cp = std::cos(phi);
  const double sp = std::sin(phi);
  const cplx d12{-(p.hx + p.dx) * sp * s, -(p.hy + p.dy) * cp * s};
  const cplx d21{-(p.hx - p.dx) * sp * s, (p.hy - p.dy) * cp * s};
  return {0.0, d12, d21, 0.0};
}

TwoLevelDerived two_level_derived(const TwoLevelParams& p, double phi) {
  if (p.is_singular()) throw SingularParameters("two-level parameters on the singular set |Delta| = |h|");
  const double ap = p.hx + p.dx, bp = p.hy + p.dy;
  const double am = p.hx - p.dx, bm = p.hy - p.dy;
  const double cp = std::cos(phi), sp = std::sin(phi);

  TwoLevelDerived d;
  d.z = {p.hz, p.dz};
  d.r_plus = std::sqrt(ap * ap * cp * cp + bp * bp * sp * sp);
  d.r_minus = std::sqrt(am * am * cp * cp + bm * bm * sp * sp);
  if (d.r_minus == 0.0) throw SingularParameters("r_minus vanishes; rho undefined");
  d.nu1 = unwrapped_angle(ap, -bp, phi);
  d.nu2 = unwrapped_angle(am, bm, phi);
  d.nu_plus = 0.5 * (d.nu2 + d.nu1);
  d.nu_minus = 0.5 * (d.nu2 - d.nu1);
  d.rho = std::sqrt(d.r_plus / d.r_minus);

  const double c = std::cos(p.theta), s = std::sin(p.theta);
  const cplx off = std::sqrt(d.r_plus * d.r_minus) * std::polar(1.0, d.nu_plus) * s;
  const cplx e = std::sqrt(off * off + d.z * d.z * c * c);
  if (std::abs(e) == 0.0) throw DegenerateSpectrum("two-level closed form at an exceptional point");
  const cplx cos_chi = d.z * c / e;
  const cplx sin_chi = off / e;
  d.chi = cplx(0.0, -1.0) * std::log(cos_chi + cplx(0.0, 1.0) * sin_chi);
  return d;
}

TwoLevelClosedForm two_level_closed_form(const TwoLevelParams& p, double phi) {
  TwoLevelClosedForm out;
  out.derived = two_level_derived(p, phi);
  const TwoLevelDerived& d = out.derived;
  const double c = std::cos(p.theta), s = std::sin(p.theta);
  const cplx off = std::sqrt(d.r_plus * d.r_minus) * std::polar(1.0, d.nu_plus) * s;
  const cplx e = std::sqrt(off * off + d.z * d.z * c * c);

  const cplx ch = std::cos(0.5 * d.chi);
  const cplx sh = std::sin(0.5 * d.chi);
  const cplx w = d.rho * std::polar(1.0, -d.nu_minus);
  const cplx wl = std::polar(1.0, d.nu_minus) / d.rho;

  EigenSystem& es = out.eigen;
  es.values = {e, -e};
  es.right[0] = {{w * ch, sh}};
  es.right[1] = {{-w * sh, ch}};
  // left kets are conjugates of the dual rows (e^{i nu-}/rho cos, sin) and (-e^{i nu-}/rho sin, cos)
  es.left[0] = {{std::conj(wl * ch), std::conj(sh)}};
  es.left[1] = {{std::conj(-wl * sh), std::conj(ch)}};
  return out;
}

void BipartiteParams::validate() const {
  if (!finite_all({eps_a, gamma, v, v_prime})) throw InvalidArgument("bipartite parameters must be finite");
  if (!(v > 0.0)) throw InvalidArgument("intracell hopping v must be positive");
  if (gamma < 0.0) throw InvalidArgument("dissipation Gamma must be non-negative");
  if (v_prime < 0.0) throw InvalidArgument("intercell hopping v' must be non-negative");
}

BipartiteParams BipartiteParams::from_ratios(double q, double eta, double eps_a) {
  BipartiteParams p;
  p.eps_a = eps_a;
  p.gamma = eta;
  p.v = 1.0;
  p.v_prime = q;
  p.validate();
  return p;
}

cplx bipartite_vk(const BipartiteParams& p, double k) {
  return {p.v + p.v_prime * std::cos(k), -p.v_prime * std::sin(k)};
}

double bipartite_radicand(const BipartiteParams& p, double k) {
  return p.v * p.v + p.v_prime * p.v_prime + 2.0 * p.v * p.v_prime * std::cos(k) - p.gamma * p.gamma;
}

double bipartite_theta(const BipartiteParams& p, double k) {
  const double c = std::cos(k), s = std::sin(k);
  if (p.v_prime <= p.v) return std::atan2(p.v_prime * s, p.v + p.v_prime * c);
  return k + std::atan2(-p.v * s, p.v_prime + p.v * c);
}

Matrix2 bipartite_bloch(const BipartiteParams& p, double k) {
  const cplx vk = bipartite_vk(p, k);
  return {cplx(p.eps_a, 0.0), vk, std::conj(vk), p.eps_b()};
}

Matrix2 bipartite_derivative(const BipartiteParams& p, double k) {
  const cplx d12{-p.v_prime * std::sin(k), -p.v_prime * std::cos(k)};
  return {0.0, d12, std::conj(d12), 0.0};
}

BipartiteClosedForm bipartite_closed_form(const BipartiteParams& p, double k) {
  const cplx vk = bipartite_vk(p, k);
  const double avk = std::abs(vk);
  const double rad = bipartite_radicand(p, k);
  const double scale = p.v * p.v + p.v_prime * p.v_prime + p.gamma * p.gamma;
  if (std::abs(rad) <= 1e-12 * scale) throw TrueCrossing("|v_k|^2 = Gamma^2: bands coalesce at this k");
  if (avk <= 1e-12 * std::sqrt(scale)) throw SingularParameters("v_k = 0: theta_k undefined at this k");

  BipartiteClosedForm out;
  out.theta_k = bipartite_theta(p, k);
  const cplx root = std::sqrt(cplx(rad, 0.0));
  const cplx cos_chi = cplx(0.0, p.gamma) / root;
  const cplx sin_chi = avk / root;
  out.chi_k = cplx(0.0, -1.0) * std::log(cos_chi + cplx(0.0, 1.0) * sin_chi);

  const cplx shift{p.eps_a, -p.gamma};
  const cplx ch = std::cos(0.5 * out.chi_k);
  const cplx sh = std::sin(0.5 * out.chi_k);
  const cplx u = vk / avk;
  EigenSystem& es = out.eigen;
  es.values = {shift + root, shift - root};
  es.right[0] = {{u * ch, sh}};
  es.right[1] = {{-u * sh, ch}};
  es.left[0] = {{u * std::conj(ch), std::conj(sh)}};
  es.left[1] = {{-u * std::conj(sh), std::conj(ch)}};
  return out;
}

ParameterLoop uniform_loop(double start, double period, std::size_t n) {
  if (n < 16 || !std::has_single_bit(n))
    throw BadResolution("loop resolution must be a power of two and at least 16");
  if (!(period > 0.0) || !std::isfinite(start)) throw InvalidArgument("loop period must be positive");
  ParameterLoop loop;
  loop.period = period;
  loop.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    loop.samples[i] = start + period * static_cast<double>(i) / static_cast<double>(n);
  return loop;
}

ParameterLoop standard_loop(LoopKind kind, std::size_t n) {
  ParameterLoop loop;
  switch (kind) {
    case LoopKind::two_level_azimuthal:
      loop = uniform_loop(0.0, 2 * pi, n);
      break;
    case LoopKind::bipartite_brillouin:
      loop = uniform_loop(-pi + 2 * pi / static_cast<double>(n), 2 * pi, n);
      break;
    case LoopKind::custom:
      throw InvalidArgument("standard_loop needs a model loop kind");
  }
  loop.kind = kind;
  return loop;
}

ParameterLoop refine(const ParameterLoop& loop) {
  if (loop.kind != LoopKind::custom) return standard_loop(loop.kind, 2 * loop.size());
  return uniform_loop(loop.start(), loop.period, 2 * loop.size());
}

LoopModel::LoopModel(MatrixFn hamiltonian, MatrixFn derivative, std::string name)
    : h_(std::move(hamiltonian)), dh_(std::move(derivative)), name_(std::move(name)) {}

LoopModel LoopModel::two_level(const TwoLevelParams& p) {
  p.validate();
  LoopModel m([p](double phi) { return two_level_hamiltonian(p, phi); },
              [p](double phi) { return two_level_derivative(p, phi); }, "two-level");
  m.params_ = p;
  return m;
}

LoopModel LoopModel::bipartite(const BipartiteParams& p) {
  p.validate();
  LoopModel m([p](double k) { return bipartite_bloch(p, k); },
              [p](double k) { return bipartite_derivative(p, k); }, "bipartite");
  m.params_ = p;
  return m;
}

}  // namespace berryline
