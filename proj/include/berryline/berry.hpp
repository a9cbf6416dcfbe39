#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "berryline/biortho.hpp"
#include "berryline/matrix2.hpp"
#include "berryline/models.hpp"

namespace berryline {

enum class ConnectionMethod { finite_difference, analytic_derivative };

// A_k(alpha) with A = A_k d alpha, A_k[o][s] = i <lambda_o|d psi_s>.
struct ConnectionSample {
  double alpha = 0.0;
  Matrix2 a;
};

// Eigenframes around a closed loop in the symmetric gauge. Both bands can
// come back with a sign flip; frame() then applies opposite half-windings
// e^{+-i pi (alpha - alpha0)/T} so the returned frames are single valued.
struct LoopFrames {
  std::vector<double> alpha;
  double period = 2 * pi;
  std::vector<EigenSystem> raw;
  bool antiperiodic = false;
  std::array<int, 2> reference{1, 1};

  std::size_t size() const { return raw.size(); }
  double step() const { return period / static_cast<double>(raw.size()); }
  cplx half_winding(int band, double a) const;
  EigenSystem frame(std::size_t i) const;
};

LoopFrames loop_frames(const ParameterLoop& loop, const LoopModel& model, bool detect_crossings = true);

// Analytic-derivative connection from dH/dalpha (perturbative formulas in the
// symmetric gauge), one matrix per frame.
std::vector<ConnectionSample> analytic_connection(const LoopFrames& frames, const LoopModel& model);
// Fourth-order central differences on a periodic frame sequence.
std::vector<ConnectionSample> fd_connection(const std::vector<double>& alpha, double period,
                                            const std::vector<EigenSystem>& frames);

std::vector<ConnectionSample> connection_samples(const ParameterLoop& loop, const LoopModel& model,
                                                 ConnectionMethod method = ConnectionMethod::finite_difference);

// Closed-form bipartite connection, principal branch of sqrt(|v_k|^2 - Gamma^2):
// A = 1/2 (s0 + sz cos chi - sx sin chi) theta' + 1/2 sy chi'.
std::vector<ConnectionSample> bipartite_closed_connection(const ParameterLoop& loop, const BipartiteParams& p);

struct RefinementOptions {
  std::size_t max_samples = std::size_t{1} << 16;
  double tolerance = 1e-9;
  bool throw_on_failure = true;
};

struct BerryPhaseResult {
  double gamma_b_plus = 0.0, xi_b_plus = 0.0;
  double gamma_b_minus = 0.0, xi_b_minus = 0.0;
  double q_index = 0.0;       // (1/2pi) Re of the trapezoid of Tr A
  double q_index_imag = 0.0;  // imaginary part of the same integral
  double q_wilson = 0.0;      // overlap-determinant (or winding) route
  std::optional<int> q_rounded;
  std::size_t resolution = 0;
  std::vector<std::pair<std::size_t, double>> refinement_history;
  std::vector<std::pair<std::size_t, std::array<cplx, 2>>> band_history;
  bool converged = false;
  bool near_critical = false;
  bool through_exceptional_points = false;
  std::string failure;

  cplx gamma(Band b) const {
    return b == Band::plus ? cplx(gamma_b_plus, xi_b_plus) : cplx(gamma_b_minus, xi_b_minus);
  }
};

BerryPhaseResult global_berry_phase(const ParameterLoop& loop, const LoopModel& model, RefinementOptions options = {});
cplx band_berry_phase(const ParameterLoop& loop, const LoopModel& model, Band band, RefinementOptions options = {});

// Signed winding (sgn((hx+dx)(hy+dy)) + sgn((hx-dx)(hy-dy)))/2; nullopt on the singular set.
std::optional<int> analytic_q(const TwoLevelParams& p);
// Theta(q-1); nullopt at q = 1.
std::optional<int> analytic_q(const BipartiteParams& p);

// Within 1e-3 of eta = q+1, eta = |q-1| or q = 1.
bool near_critical(const BipartiteParams& p);

struct GaugeTransform {
  std::array<std::function<double(double)>, 2> f;   // empty means f = 0
  std::array<std::function<double(double)>, 2> df;  // optional exact derivative
  std::array<int, 2> windings{0, 0};
};

struct GaugeReport {
  std::vector<EigenSystem> transformed;
  std::vector<ConnectionSample> a_before, a_after;
  std::array<cplx, 2> gamma_before{}, gamma_after{};
  double q_before = 0.0, q_after = 0.0;
  double connection_error = 0.0;  // max |A'_s - A_s - df_s|
  double phase_error = 0.0;       // max |gamma'_s - gamma_s - 2 pi n_s|
  double q_error = 0.0;           // |Q' - Q - sum n|
};

GaugeReport apply_gauge(const LoopFrames& frames, const GaugeTransform& gauge);

// max over samples of |Tr A_1|, A_1 the first-order adiabatic correction;
// derivatives of left and right frames are taken independently.
double first_order_correction_trace(const ParameterLoop& loop, const LoopModel& model);

}  // namespace berryline
