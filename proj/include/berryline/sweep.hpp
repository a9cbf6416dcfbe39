#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "berryline/berry.hpp"
#include "berryline/biortho.hpp"
#include "berryline/models.hpp"
#include "berryline/spectrum.hpp"

namespace berryline {

// Inclusive evenly spaced axis; count = 1 gives {min}.
struct AxisRange {
  double min = 0.0;
  double max = 0.0;
  std::size_t count = 1;

  std::vector<double> values() const;
  void validate() const;
  // "min:max:count"
  static AxisRange parse(std::string_view text);
};

// Worker count: explicit request, else BERRYLINE_THREADS, else hardware.
std::size_t worker_count(std::size_t requested = 0);

struct PhaseCell {
  double q = 0.0, eta = 0.0;
  double gamma_g_plus = 0.0, xi_g_plus = 0.0;
  double gamma_g_minus = 0.0, xi_g_minus = 0.0;
  double q_index = 0.0;
  Region region = Region::none;
  bool converged = false;
  bool near_critical = false;
  bool straddles_transition = false;
  std::size_t resolution = 0;
  std::string error;
};

struct PhaseDiagramOptions {
  std::size_t samples_per_loop = 256;
  std::size_t threads = 0;
  RefinementOptions refinement{};
};

struct PhaseDiagramGrid {
  std::vector<double> q_axis, eta_axis;
  std::vector<PhaseCell> cells;  // eta outer, q inner
  double q_offset = 0.0;
  std::size_t samples_per_loop = 0;

  const PhaseCell& at(std::size_t iq, std::size_t ieta) const { return cells[ieta * q_axis.size() + iq]; }
};

// One (q, eta) point with the grid's conventions; errors are recorded, not thrown.
PhaseCell bipartite_point(double q, double eta, std::size_t samples_per_loop = 256, RefinementOptions refinement = {});

PhaseDiagramGrid phase_diagram(const AxisRange& q, const AxisRange& eta, const PhaseDiagramOptions& options = {});

std::string phase_diagram_csv(const PhaseDiagramGrid& grid);
// Sidecar timestamp honours SOURCE_DATE_EPOCH.
nlohmann::ordered_json phase_diagram_sidecar(const PhaseDiagramGrid& grid, const AxisRange& q, const AxisRange& eta);
// Writes the CSV and "<csv>.json" next to it.
void write_phase_diagram(const PhaseDiagramGrid& grid, const AxisRange& q, const AxisRange& eta,
                         const std::filesystem::path& csv_path);

enum class CriticalLine { d1, d2 };

struct DivergencePoint {
  double eta = 0.0;
  double log_distance = 0.0;  // -ln|eta - eta_c|
  double value = 0.0;         // |xi^g| on d2, |gamma^g| on d1
  double gamma_g = 0.0;
  double xi_g = 0.0;
  bool converged = false;
};

struct DivergenceFit {
  double slope = 0.0;
  double intercept = 0.0;
  double correlation = 0.0;
  double eta_c = 0.0;
  std::size_t used = 0;
  double max_abs_gamma_g = 0.0;
  std::vector<DivergencePoint> points;
};

// d2 (eta_c = |q-1|) is approached from below and d1 (eta_c = q+1) from above,
// eta = eta_c (1 -+ 10^-j) for j = 1..decades.
DivergenceFit divergence_scan(double q, CriticalLine line, int decades, Band band = Band::plus,
                              std::size_t samples_per_loop = 256);

struct QMapCell {
  double dx = 0.0, dy = 0.0;
  std::optional<int> analytic;
  std::optional<double> numeric;
  std::optional<int> numeric_rounded;
  bool mismatch = false;
  std::string error;
};

struct QMap {
  std::vector<double> dx_axis, dy_axis;
  std::vector<QMapCell> cells;  // dy outer, dx inner
  std::size_t mismatches = 0;

  const QMapCell& at(std::size_t ix, std::size_t iy) const { return cells[iy * dx_axis.size() + ix]; }
};

// base supplies hx, hy, hz, dz and theta; dx, dy are swept.
QMap two_level_q_map(const TwoLevelParams& base, const AxisRange& dx, const AxisRange& dy, std::size_t samples = 256,
                     std::size_t threads = 0);

}  // namespace berryline
