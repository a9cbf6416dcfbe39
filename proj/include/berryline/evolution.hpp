#pragma once

#include <cstddef>
#include <functional>

#include "berryline/berry.hpp"
#include "berryline/biortho.hpp"
#include "berryline/matrix2.hpp"
#include "berryline/models.hpp"

namespace berryline {

// Cycle time T, fixed step count, and the map t -> alpha(t). The default path
// is linear: alpha(t) = alpha0 + loop_period * t / T.
struct Schedule {
  double period_t = 1.0;
  std::size_t steps = 1000;
  double alpha0 = 0.0;
  double loop_period = 2 * pi;
  std::function<double(double)> path;

  double alpha(double t) const;
  void validate() const;

  static Schedule linear(double period_t, std::size_t steps, double alpha0 = 0.0, double loop_period = 2 * pi);
  // Steps chosen from a step density (steps per unit time), at least 1000.
  static Schedule with_density(double period_t, double steps_per_unit_time, double alpha0 = 0.0,
                               double loop_period = 2 * pi);
};

// The state is kept at unit norm; the true state is exp(log_norm) * psi.
struct EvolvedState {
  Vec2 psi;
  double log_norm = 0.0;
};

// Called at t = 0 and after every step with the normalized state.
using EvolutionObserver = std::function<void(std::size_t step, double t, const Vec2& psi, double log_norm)>;

// Classical RK4 for i d/dt psi = H(alpha(t)) psi (or H^dagger when dual).
EvolvedState evolve(const LoopModel& model, const Schedule& schedule, const Vec2& psi0, bool dual = false,
                    const EvolutionObserver& observer = {});

enum class Regime { weak, strong };

struct EvolutionReport {
  Vec2 psi_final;
  double log_norm = 0.0;
  cplx total_phase;
  double gamma_d = 0.0, xi_d = 0.0;
  double gamma_g = 0.0, xi_g = 0.0;
  double defect = 0.0;
  double leakage = 0.0;
  Regime regime = Regime::weak;
  std::size_t steps = 0;
};

// Starts in the tracked band eigenvector at alpha(0), integrates one cycle and
// compares -i log(<lambda(0)|psi(T)> / <lambda(0)|psi(0)>) with gamma^D + gamma^G.
EvolutionReport adiabatic_decomposition(const LoopModel& model, const Schedule& schedule, Band band,
                                        std::size_t berry_samples = 256);

}  // namespace berryline
