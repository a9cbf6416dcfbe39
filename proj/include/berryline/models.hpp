#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "berryline/biortho.hpp"
#include "berryline/matrix2.hpp"

namespace berryline {

inline constexpr double pi = 3.14159265358979323846;

struct TwoLevelParams {
  double hx = 0.0, hy = 0.0, hz = 0.0;
  double dx = 0.0, dy = 0.0, dz = 0.0;
  double theta = pi / 2;

  bool is_singular() const;
  void validate() const;
};

struct TwoLevelDerived {
  cplx z;
  double r_plus = 0.0, r_minus = 0.0;
  double nu1 = 0.0, nu2 = 0.0;
  double nu_plus = 0.0, nu_minus = 0.0;
  double rho = 0.0;
  cplx chi;
};

struct TwoLevelClosedForm {
  TwoLevelDerived derived;
  EigenSystem eigen;
};

// Continuous argument of a cos(phi) + i b sin(phi) starting from its principal
// value at phi = 0. Requires a != 0 and b != 0.
double unwrapped_angle(double a, double b, double phi);

Matrix2 two_level_hamiltonian(const TwoLevelParams& p, double phi);
Matrix2 two_level_derivative(const TwoLevelParams& p, double phi);
TwoLevelDerived two_level_derived(const TwoLevelParams& p, double phi);
TwoLevelClosedForm two_level_closed_form(const TwoLevelParams& p, double phi);

struct BipartiteParams {
  double eps_a = 0.0;
  double gamma = 0.0;
  double v = 1.0;
  double v_prime = 0.0;

  double q() const { return v_prime / v; }
  double eta() const { return gamma / v; }
  cplx eps_b() const { return {eps_a, -2.0 * gamma}; }
  void validate() const;

  static BipartiteParams from_ratios(double q, double eta, double eps_a = 0.0);
};

// Hopping amplitude v_k = v + v' e^{-ik}; see README for the sign convention.
cplx bipartite_vk(const BipartiteParams& p, double k);
// |v_k|^2 - Gamma^2
double bipartite_radicand(const BipartiteParams& p, double k);
// theta_k with v_k = |v_k| e^{-i theta_k}, continuous in k, theta_0 = 0.
double bipartite_theta(const BipartiteParams& p, double k);

Matrix2 bipartite_bloch(const BipartiteParams& p, double k);
Matrix2 bipartite_derivative(const BipartiteParams& p, double k);

struct BipartiteClosedForm {
  EigenSystem eigen;
  double theta_k = 0.0;
  cplx chi_k;
};

BipartiteClosedForm bipartite_closed_form(const BipartiteParams& p, double k);

enum class LoopKind { two_level_azimuthal, bipartite_brillouin, custom };

struct ParameterLoop {
  LoopKind kind = LoopKind::custom;
  std::vector<double> samples;
  double period = 2 * pi;

  std::size_t size() const { return samples.size(); }
  double start() const { return samples.front(); }
  double step() const { return period / static_cast<double>(samples.size()); }
};

// Two-level: phi_i = 2 pi i / N on [0, 2pi). Bipartite: k_i = -pi + 2 pi (i+1)/N on (-pi, pi].
ParameterLoop standard_loop(LoopKind kind, std::size_t n);
ParameterLoop uniform_loop(double start, double period, std::size_t n);
// Same loop at twice the resolution (every old sample is kept).
ParameterLoop refine(const ParameterLoop& loop);

// A Hamiltonian family driven around a loop, with its analytic derivative.
class LoopModel {
 public:
  using MatrixFn = std::function<Matrix2(double)>;

  LoopModel(MatrixFn hamiltonian, MatrixFn derivative, std::string name = "custom");

  static LoopModel two_level(const TwoLevelParams& p);
  static LoopModel bipartite(const BipartiteParams& p);

  Matrix2 hamiltonian(double alpha) const { return h_(alpha); }
  Matrix2 derivative(double alpha) const { return dh_(alpha); }
  const std::string& name() const { return name_; }

  const TwoLevelParams* two_level_params() const { return std::get_if<TwoLevelParams>(&params_); }
  const BipartiteParams* bipartite_params() const { return std::get_if<BipartiteParams>(&params_); }

 private:
  MatrixFn h_;
  MatrixFn dh_;
  std::string name_;
  std::variant<std::monostate, TwoLevelParams, BipartiteParams> params_;
};

}  // namespace berryline
