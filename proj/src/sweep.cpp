#include "berryline/sweep.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <exception>
#include <limits>
#include <string>
#include <thread>

#include "berryline/errors.hpp"
#include "berryline/io.hpp"

namespace berryline {
namespace {

constexpr double nan_value = std::numeric_limits<double>::quiet_NaN();

template <class Fn>
void parallel_for(std::size_t n, std::size_t threads, Fn&& fn) {
  threads = std::min(threads, n);
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
  for (auto& th : pool) th.join();
}

double parse_number(std::string_view s, const char* what) {
  std::string str(s);
  char* end = nullptr;
  const double v = std::strtod(str.c_str(), &end);
  if (str.empty() || end != str.c_str() + str.size() || !std::isfinite(v))
    throw InvalidArgument(std::string("malformed ") + what + " '" + str + "'");
  return v;
}

std::string timestamp() {
  std::time_t t = 0;
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH"); epoch && *epoch)
    t = static_cast<std::time_t>(std::strtoll(epoch, nullptr, 10));
  else
    t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

nlohmann::ordered_json axis_json(const AxisRange& r) {
  return {{"min", r.min}, {"max", r.max}, {"count", r.count}};
}

}  // namespace

std::vector<double> AxisRange::values() const {
  validate();
  std::vector<double> out(count);
  if (count == 1) {
    out[0] = min;
    return out;
  }
  for (std::size_t i = 0; i < count; ++i)
    out[i] = i + 1 == count ? max : min + (max - min) * static_cast<double>(i) / static_cast<double>(count - 1);
  return out;
}

void AxisRange::validate() const {
  if (count == 0) throw InvalidArgument("axis count must be at least 1");
  if (!std::isfinite(min) || !std::isfinite(max)) throw InvalidArgument("axis bounds must be finite");
  if (count > 1 && !(max > min)) throw InvalidArgument("axis must be strictly increasing (max > min)");
}

AxisRange AxisRange::parse(std::string_view text) {
  const auto a = text.find(':');
  const auto b = a == std::string_view::npos ? a : text.find(':', a + 1);
  if (b == std::string_view::npos || text.find(':', b + 1) != std::string_view::npos)
    throw InvalidArgument("range must look like min:max:count, got '" + std::string(text) + "'");
  AxisRange r;
  r.min = parse_number(text.substr(0, a), "range minimum");
  r.max = parse_number(text.substr(a + 1, b - a - 1), "range maximum");
  const std::string cnt(text.substr(b + 1));
  char* end = nullptr;
  const long long c = std::strtoll(cnt.c_str(), &end, 10);
  if (cnt.empty() || end != cnt.c_str() + cnt.size() || c < 1)
    throw InvalidArgument("range count must be a positive integer, got '" + cnt + "'");
  r.count = static_cast<std::size_t>(c);
  r.validate();
  return r;
}

std::size_t worker_count(std::size_t requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("BERRYLINE_THREADS"); env && *env) {
    char* end = nullptr;
    const long long v = std::strtoll(env, &end, 10);
    if (*end != '\0' || v < 1) throw InvalidArgument("BERRYLINE_THREADS must be an integer >= 1");
    return static_cast<std::size_t>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

PhaseCell bipartite_point(double q, double eta, std::size_t samples_per_loop, RefinementOptions refinement) {
  PhaseCell cell;
  cell.q = q;
  cell.eta = eta;
  cell.gamma_g_plus = cell.xi_g_plus = cell.gamma_g_minus = cell.xi_g_minus = cell.q_index = nan_value;
  refinement.throw_on_failure = false;
  try {
    cell.region = classify_region(q, eta).region;
    const BipartiteParams p = BipartiteParams::from_ratios(q, eta);
    const BerryPhaseResult r =
        global_berry_phase(standard_loop(LoopKind::bipartite_brillouin, samples_per_loop), LoopModel::bipartite(p), refinement);
    cell.gamma_g_plus = r.gamma_b_plus;
    cell.xi_g_plus = r.xi_b_plus;
    cell.gamma_g_minus = r.gamma_b_minus;
    cell.xi_g_minus = r.xi_b_minus;
    cell.q_index = r.q_index;
    cell.near_critical = r.near_critical;
    cell.resolution = r.resolution;
    cell.error = r.failure;
    cell.converged = r.converged && !r.near_critical;
  } catch (const std::exception& e) {
    cell.error = e.what();
    cell.converged = false;
  }
  return cell;
}

PhaseDiagramGrid phase_diagram(const AxisRange& q, const AxisRange& eta, const PhaseDiagramOptions& options) {
  PhaseDiagramGrid grid;
  grid.q_axis = q.values();
  grid.eta_axis = eta.values();
  grid.samples_per_loop = options.samples_per_loop;
  if (grid.q_axis.front() <= 0.0) throw InvalidArgument("q axis must be positive");
  if (grid.eta_axis.front() < 0.0) throw InvalidArgument("eta axis must be nonnegative");

  const double dq = q.count > 1 ? (q.max - q.min) / static_cast<double>(q.count - 1) : 0.0;
  bool hits_transition = false;
  for (double x : grid.q_axis) hits_transition = hits_transition || std::abs(x - 1.0) < 1e-12;
  if (hits_transition) {
    grid.q_offset = dq > 0.0 ? 0.5 * dq : 1e-3;
    for (double& x : grid.q_axis) x += grid.q_offset;
  }

  const std::size_t nq = grid.q_axis.size();
  grid.cells.resize(nq * grid.eta_axis.size());
  parallel_for(grid.cells.size(), worker_count(options.threads), [&](std::size_t i) {
    const double qi = grid.q_axis[i % nq];
    PhaseCell cell = bipartite_point(qi, grid.eta_axis[i / nq], options.samples_per_loop, options.refinement);
    if (dq > 0.0 && std::abs(qi - 1.0) < 0.5 * dq) {
      cell.straddles_transition = true;
      cell.converged = false;
    }
    grid.cells[i] = std::move(cell);
  });
  return grid;
}

std::string phase_diagram_csv(const PhaseDiagramGrid& grid) {
  std::string out = "q,eta,gamma_g_plus,xi_g_plus,gamma_g_minus,xi_g_minus,Q,region,converged\n";
  for (const PhaseCell& c : grid.cells) {
    for (double x : {c.q, c.eta, c.gamma_g_plus, c.xi_g_plus, c.gamma_g_minus, c.xi_g_minus, c.q_index}) {
      out += format_double(x);
      out += ',';
    }
    out += region_name(c.region);
    out += c.converged ? ",true\n" : ",false\n";
  }
  return out;
}

nlohmann::ordered_json phase_diagram_sidecar(const PhaseDiagramGrid& grid, const AxisRange& q, const AxisRange& eta) {
  nlohmann::ordered_json j;
  j["tool"] = "berryline";
  j["version"] = BERRYLINE_VERSION;
  j["timestamp"] = timestamp();
  j["model"] = "bipartite";
  j["columns"] = {"q", "eta", "gamma_g_plus", "xi_g_plus", "gamma_g_minus", "xi_g_minus", "Q", "region", "converged"};
  j["row_order"] = "eta outer, q inner";
  j["parameters"] = {{"q_range", axis_json(q)},
                     {"eta_range", axis_json(eta)},
                     {"q_offset", grid.q_offset},
                     {"samples_per_loop", grid.samples_per_loop},
                     {"v", 1.0}};
  j["axes"] = {{"q", grid.q_axis}, {"eta", grid.eta_axis}};
  std::size_t converged = 0;
  for (const auto& c : grid.cells) converged += c.converged ? 1 : 0;
  j["cells"] = grid.cells.size();
  j["converged_cells"] = converged;
  return j;
}

void write_phase_diagram(const PhaseDiagramGrid& grid, const AxisRange& q, const AxisRange& eta,
                         const std::filesystem::path& csv_path) {
  write_atomic(csv_path, phase_diagram_csv(grid));
  std::filesystem::path sidecar = csv_path;
  sidecar += ".json";
  write_atomic(sidecar, dump_json(phase_diagram_sidecar(grid, q, eta)) + "\n");
}

DivergenceFit divergence_scan(double q, CriticalLine line, int decades, Band band, std::size_t samples_per_loop) {
  if (!(q > 0.0) || std::abs(q - 1.0) < 1e-12) throw InvalidArgument("divergence scan needs q > 0, q != 1");
  if (decades < 1) throw InvalidArgument("decades must be at least 1");
  DivergenceFit fit;
  fit.eta_c = line == CriticalLine::d2 ? std::abs(q - 1.0) : q + 1.0;
  const double side = line == CriticalLine::d2 ? -1.0 : 1.0;

  std::vector<DivergencePoint> pts(static_cast<std::size_t>(decades));
  for (int j = 1; j <= decades; ++j) {
    const double delta = std::pow(10.0, -j);
    DivergencePoint& pt = pts[static_cast<std::size_t>(j - 1)];
    pt.eta = fit.eta_c * (1.0 + side * delta);
    pt.log_distance = -std::log(std::abs(pt.eta - fit.eta_c));
    RefinementOptions ro;
    ro.throw_on_failure = false;
    try {
      const BerryPhaseResult r = global_berry_phase(standard_loop(LoopKind::bipartite_brillouin, samples_per_loop),
                                                    LoopModel::bipartite(BipartiteParams::from_ratios(q, pt.eta)), ro);
      const cplx g = r.gamma(band);
      pt.gamma_g = g.real();
      pt.xi_g = g.imag();
      pt.value = line == CriticalLine::d2 ? std::abs(g.imag()) : std::abs(g.real());
      pt.converged = r.converged;
    } catch (const Error&) {
      pt.converged = false;
    }
  }

  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (const auto& pt : pts) {
    if (!pt.converged) continue;
    ++fit.used;
    fit.max_abs_gamma_g = std::max(fit.max_abs_gamma_g, std::abs(pt.gamma_g));
    sx += pt.log_distance;
    sy += pt.value;
    sxx += pt.log_distance * pt.log_distance;
    syy += pt.value * pt.value;
    sxy += pt.log_distance * pt.value;
  }
  fit.points = std::move(pts);
  if (fit.used < 6) {
    std::vector<std::pair<std::size_t, double>> history;
    for (std::size_t i = 0; i < fit.points.size(); ++i) history.emplace_back(i + 1, fit.points[i].value);
    throw NotConverged("divergence fit needs at least 6 converged points, have " + std::to_string(fit.used), history);
  }
  const double n = static_cast<double>(fit.used);
  const double cxx = sxx - sx * sx / n, cyy = syy - sy * sy / n, cxy = sxy - sx * sy / n;
  fit.slope = cxy / cxx;
  fit.intercept = (sy - fit.slope * sx) / n;
  fit.correlation = cyy > 0.0 ? cxy / std::sqrt(cxx * cyy) : 0.0;
  return fit;
}

QMap two_level_q_map(const TwoLevelParams& base, const AxisRange& dx, const AxisRange& dy, std::size_t samples,
                     std::size_t threads) {
  QMap map;
  map.dx_axis = dx.values();
  map.dy_axis = dy.values();
  const std::size_t nx = map.dx_axis.size();
  map.cells.resize(nx * map.dy_axis.size());
  parallel_for(map.cells.size(), worker_count(threads), [&](std::size_t i) {
    QMapCell cell;
    TwoLevelParams p = base;
    p.dx = cell.dx = map.dx_axis[i % nx];
    p.dy = cell.dy = map.dy_axis[i / nx];
    cell.analytic = analytic_q(p);
    if (cell.analytic) {
      try {
        const BerryPhaseResult r = global_berry_phase(standard_loop(LoopKind::two_level_azimuthal, samples),
                                                      LoopModel::two_level(p));
        cell.numeric = r.q_index;
        cell.numeric_rounded = r.q_rounded;
        cell.mismatch = r.q_rounded != cell.analytic;
      } catch (const std::exception& e) {
        cell.error = e.what();
        cell.mismatch = true;
      }
    }
    map.cells[i] = std::move(cell);
  });
  for (const auto& c : map.cells) map.mismatches += c.mismatch ? 1 : 0;
  return map;
}

}  // namespace berryline
