#include "cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <exception>
#include <functional>
#include <ostream>

#include "berryline/berry.hpp"
#include "berryline/elliptic.hpp"
#include "berryline/errors.hpp"
#include "berryline/evolution.hpp"
#include "berryline/io.hpp"
#include "berryline/spectrum.hpp"
#include "berryline/sweep.hpp"

namespace berryline::cli {
namespace {

using json = nlohmann::ordered_json;

json complex_json(cplx z) { return {{"re", z.real()}, {"im", z.imag()}}; }

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const SingularParameters*>(&e) || dynamic_cast<const SingularLoop*>(&e) ||
      dynamic_cast<const UndefinedAtTransition*>(&e) || dynamic_cast<const TrueCrossing*>(&e) ||
      dynamic_cast<const DegenerateSpectrum*>(&e) || dynamic_cast<const DefectiveMatrix*>(&e))
    return singular;
  if (dynamic_cast<const InvalidArgument*>(&e) || dynamic_cast<const NonFiniteInput*>(&e) ||
      dynamic_cast<const BadResolution*>(&e) || dynamic_cast<const DomainError*>(&e) ||
      dynamic_cast<const OutsideValidityDomain*>(&e))
    return malformed;
  return not_converged;
}

struct TwoLevelFlags {
  TwoLevelParams p{1.0, 1.0, 0.5, 0.0, 0.0, 0.0, pi / 2};

  void add(CLI::App* app) {
    app->add_option("--hx", p.hx, "Hermitian field h_x (energy units)");
    app->add_option("--hy", p.hy, "Hermitian field h_y (energy units)");
    app->add_option("--hz", p.hz, "Hermitian field h_z (energy units)");
    app->add_option("--dx", p.dx, "anti-Hermitian field Delta_x (energy units)");
    app->add_option("--dy", p.dy, "anti-Hermitian field Delta_y (energy units)");
    app->add_option("--dz", p.dz, "anti-Hermitian field Delta_z (energy units)");
    app->add_option("--theta", p.theta, "polar angle of the loop (rad, in [0, pi])");
  }
};

struct BipartiteFlags {
  double q = 2.0, eta = 0.5, eps_a = 0.0;

  void add(CLI::App* app) {
    app->add_option("--q", q, "hopping ratio v'/v (dimensionless, > 0)");
    app->add_option("--eta", eta, "dissipation ratio Gamma/v (dimensionless, >= 0)");
    app->add_option("--eps-a", eps_a, "on-site energy of sublattice A (units of v)");
  }
  BipartiteParams params() const { return BipartiteParams::from_ratios(q, eta, eps_a); }
};

// Model choice shared by evolve and gauge-check.
struct ModelFlags {
  std::string model = "bipartite";
  TwoLevelFlags two_level;
  BipartiteFlags bipartite;

  void add(CLI::App* app) {
    app->add_option("--model", model, "model family")->check(CLI::IsMember({"two-level", "bipartite"}));
    two_level.add(app);
    bipartite.add(app);
  }
  LoopModel make() const {
    return model == "two-level" ? LoopModel::two_level(two_level.p) : LoopModel::bipartite(bipartite.params());
  }
  LoopKind kind() const { return model == "two-level" ? LoopKind::two_level_azimuthal : LoopKind::bipartite_brillouin; }
};

Band parse_band(const std::string& s) { return s == "minus" ? Band::minus : Band::plus; }

void print(std::ostream& out, const json& j) { out << dump_json(j) << '\n'; }

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Complex Berry phases of non-Hermitian two-band loops", "berryline"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);
  app.set_version_flag("--version", BERRYLINE_VERSION);

  std::vector<std::pair<CLI::App*, std::function<int()>>> commands;

  // two-level-q
  {
    auto* sub = app.add_subcommand("two-level-q", "Topological index Q of the two-level loop, numeric and analytic");
    auto flags = std::make_shared<TwoLevelFlags>();
    auto samples = std::make_shared<std::size_t>(256);
    flags->add(sub);
    sub->add_option("--samples", *samples, "initial loop resolution (power of two >= 16)");
    commands.emplace_back(sub, [flags, samples, &out] {
      flags->p.validate();
      const LoopModel model = LoopModel::two_level(flags->p);
      const BerryPhaseResult r = global_berry_phase(standard_loop(LoopKind::two_level_azimuthal, *samples), model);
      const auto qa = analytic_q(flags->p);
      json j;
      j["Q_numeric"] = r.q_index;
      j["Q_wilson"] = r.q_wilson;
      j["Q_analytic"] = qa ? json(*qa) : json(nullptr);
      j["gamma_plus"] = complex_json(r.gamma(Band::plus));
      j["gamma_minus"] = complex_json(r.gamma(Band::minus));
      j["resolution"] = r.resolution;
      j["converged"] = r.converged;
      print(out, j);
      return ok;
    });
  }

  // bipartite
  {
    auto* sub = app.add_subcommand("bipartite", "Global Berry phases of the dissipative bipartite chain");
    auto flags = std::make_shared<BipartiteFlags>();
    auto samples = std::make_shared<std::size_t>(256);
    flags->add(sub);
    sub->add_option("--samples", *samples, "initial Brillouin-zone resolution (power of two >= 16)");
    commands.emplace_back(sub, [flags, samples, &out] {
      const BipartiteParams p = flags->params();
      const BerryPhaseResult r = global_berry_phase(standard_loop(LoopKind::bipartite_brillouin, *samples),
                                                    LoopModel::bipartite(p));
      const CrossingReport cr = classify_region(flags->q, flags->eta);
      json j;
      j["q"] = flags->q;
      j["eta"] = flags->eta;
      j["gamma_plus"] = complex_json(r.gamma(Band::plus));
      j["gamma_minus"] = complex_json(r.gamma(Band::minus));
      j["Q"] = r.q_index;
      j["Q_wilson"] = r.q_wilson;
      j["region"] = std::string(region_name(cr.region));
      j["near_critical"] = r.near_critical;
      j["resolution"] = r.resolution;
      j["converged"] = r.converged;
      if (flags->eta < std::abs(flags->q - 1.0)) {
        const cplx cp = closed_form_gamma(flags->q, flags->eta, Band::plus);
        const cplx cm = closed_form_gamma(flags->q, flags->eta, Band::minus);
        j["closed_form"] = {{"gamma_plus", complex_json(cp)},
                            {"gamma_minus", complex_json(cm)},
                            {"max_abs_difference", std::max(std::abs(cp - r.gamma(Band::plus)),
                                                            std::abs(cm - r.gamma(Band::minus)))}};
      }
      print(out, j);
      return ok;
    });
  }

  // phase-diagram
  {
    auto* sub = app.add_subcommand("phase-diagram", "Sweep the bipartite (q, eta) plane and write CSV plus JSON sidecar");
    auto q = std::make_shared<std::string>("0.1:3:100");
    auto eta = std::make_shared<std::string>("0:3:100");
    auto path = std::make_shared<std::string>("phase_diagram.csv");
    auto format = std::make_shared<std::string>("csv");
    auto samples = std::make_shared<std::size_t>(256);
    auto threads = std::make_shared<std::size_t>(0);
    sub->add_option("--q", *q, "q axis as min:max:count (dimensionless)");
    sub->add_option("--eta", *eta, "eta axis as min:max:count (dimensionless)");
    sub->add_option("--out", *path, "output path; the sidecar goes to <out>.json");
    sub->add_option("--format", *format, "csv writes CSV plus sidecar; json writes one JSON document")
        ->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--samples", *samples, "initial loop resolution per cell (power of two >= 16)");
    sub->add_option("--threads", *threads, "worker threads (0 = BERRYLINE_THREADS or all cores)");
    commands.emplace_back(sub, [=, &out] {
      const AxisRange qr = AxisRange::parse(*q), er = AxisRange::parse(*eta);
      PhaseDiagramOptions opt;
      opt.samples_per_loop = *samples;
      opt.threads = *threads;
      standard_loop(LoopKind::bipartite_brillouin, *samples);  // validates the resolution up front
      const PhaseDiagramGrid grid = phase_diagram(qr, er, opt);
      if (*format == "csv") {
        write_phase_diagram(grid, qr, er, *path);
      } else {
        json doc = phase_diagram_sidecar(grid, qr, er);
        json rows = json::array();
        for (const auto& c : grid.cells)
          rows.push_back({{"q", c.q}, {"eta", c.eta}, {"gamma_g_plus", c.gamma_g_plus}, {"xi_g_plus", c.xi_g_plus},
                          {"gamma_g_minus", c.gamma_g_minus}, {"xi_g_minus", c.xi_g_minus}, {"Q", c.q_index},
                          {"region", std::string(region_name(c.region))}, {"converged", c.converged}});
        doc["rows"] = std::move(rows);
        write_atomic(*path, dump_json(doc) + "\n");
      }
      std::size_t converged = 0;
      for (const auto& c : grid.cells) converged += c.converged ? 1 : 0;
      print(out, {{"out", *path}, {"cells", grid.cells.size()}, {"converged", converged}, {"q_offset", grid.q_offset}});
      return ok;
    });
  }

  // ep-classify
  {
    auto* sub = app.add_subcommand("ep-classify", "Classify (q, eta) by exceptional-point structure and verify numerically");
    auto flags = std::make_shared<BipartiteFlags>();
    auto k_samples = std::make_shared<std::size_t>(1024);
    sub->add_option("--q", flags->q, "hopping ratio v'/v (dimensionless, > 0)");
    sub->add_option("--eta", flags->eta, "dissipation ratio Gamma/v (dimensionless, >= 0)");
    sub->add_option("--k-samples", *k_samples, "k grid for the numeric scan (>= 256)");
    commands.emplace_back(sub, [flags, k_samples, &out] {
      const CrossingReport cr = verify_region(flags->q, flags->eta, *k_samples);
      json also = json::array();
      for (Region r : cr.also_on) also.push_back(std::string(region_name(r)));
      print(out, {{"q", flags->q},
                  {"eta", flags->eta},
                  {"region", std::string(region_name(cr.region))},
                  {"also_on", also},
                  {"witnesses", cr.witnesses},
                  {"gap_min_re", cr.gap_min_re},
                  {"gap_min_im", cr.gap_min_im}});
      return ok;
    });
  }

  // evolve
  {
    auto* sub = app.add_subcommand("evolve", "Integrate one adiabatic cycle and split the phase into dynamic and geometric parts");
    auto model = std::make_shared<ModelFlags>();
    auto period = std::make_shared<double>(100.0);
    auto steps = std::make_shared<std::size_t>(0);
    auto band = std::make_shared<std::string>("plus");
    auto berry_samples = std::make_shared<std::size_t>(256);
    model->add(sub);
    sub->add_option("--T", *period, "cycle time (units of 1/energy)");
    sub->add_option("--steps", *steps, "RK4 steps (0 = 400 per unit time, at least 1000)");
    sub->add_option("--band", *band, "initial band")->check(CLI::IsMember({"plus", "minus"}));
    sub->add_option("--berry-samples", *berry_samples, "loop resolution for the geometric part");
    commands.emplace_back(sub, [=, &out] {
      const Schedule s = *steps == 0 ? Schedule::with_density(*period, 400.0) : Schedule::linear(*period, *steps);
      const EvolutionReport r = adiabatic_decomposition(model->make(), s, parse_band(*band), *berry_samples);
      print(out, {{"T", *period},
                  {"steps", r.steps},
                  {"total_phase", complex_json(r.total_phase)},
                  {"gamma_d", complex_json({r.gamma_d, r.xi_d})},
                  {"gamma_g", complex_json({r.gamma_g, r.xi_g})},
                  {"defect", r.defect},
                  {"leakage", r.leakage},
                  {"regime", r.regime == Regime::strong ? "strong" : "weak"}});
      return ok;
    });
  }

  // gauge-check
  {
    auto* sub = app.add_subcommand("gauge-check", "Apply a winding gauge e^{-i f} to band frames and check the transformation laws");
    auto model = std::make_shared<ModelFlags>();
    auto winding = std::make_shared<int>(1);
    auto band = std::make_shared<std::string>("plus");
    auto samples = std::make_shared<std::size_t>(4096);
    model->add(sub);
    sub->add_option("--winding", *winding, "integer winding n of f(alpha) = 2 pi n (alpha - alpha0)/T");
    sub->add_option("--band", *band, "band(s) receiving the winding")->check(CLI::IsMember({"plus", "minus", "both"}));
    sub->add_option("--samples", *samples, "loop resolution (power of two >= 16)");
    commands.emplace_back(sub, [=, &out] {
      const ParameterLoop loop = standard_loop(model->kind(), *samples);
      const LoopFrames lf = loop_frames(loop, model->make());
      GaugeTransform g;
      const double a0 = loop.start(), period = loop.period;
      for (int s = 0; s < 2; ++s) {
        const bool chosen = *band == "both" || (s == 0) == (*band == "plus");
        if (!chosen) continue;
        const int n = *winding;
        g.windings[static_cast<std::size_t>(s)] = n;
        g.f[static_cast<std::size_t>(s)] = [=](double a) { return 2 * pi * n * (a - a0) / period; };
        g.df[static_cast<std::size_t>(s)] = [=](double) { return 2 * pi * n / period; };
      }
      const GaugeReport r = apply_gauge(lf, g);
      print(out, {{"windings", g.windings},
                  {"Q", r.q_before},
                  {"Q_prime", r.q_after},
                  {"Q_prime_minus_Q", r.q_after - r.q_before},
                  {"connection_error", r.connection_error},
                  {"phase_error", r.phase_error},
                  {"q_error", r.q_error}});
      return ok;
    });
  }

  // divergence-scan
  {
    auto* sub = app.add_subcommand("divergence-scan", "Approach a critical line geometrically and fit the log divergence");
    auto q = std::make_shared<double>(0.5);
    auto line = std::make_shared<std::string>("d2");
    auto decades = std::make_shared<int>(8);
    auto band = std::make_shared<std::string>("plus");
    sub->add_option("--q", *q, "hopping ratio v'/v (dimensionless, != 1)");
    sub->add_option("--line", *line, "d1: eta = q+1, d2: eta = |q-1|")->check(CLI::IsMember({"d1", "d2"}));
    sub->add_option("--decades", *decades, "points at eta_c (1 -+ 10^-j), j = 1..decades");
    sub->add_option("--band", *band, "band")->check(CLI::IsMember({"plus", "minus"}));
    commands.emplace_back(sub, [=, &out] {
      const DivergenceFit f =
          divergence_scan(*q, *line == "d1" ? CriticalLine::d1 : CriticalLine::d2, *decades, parse_band(*band));
      json pts = json::array();
      for (const auto& p : f.points)
        pts.push_back({{"eta", p.eta}, {"minus_log_distance", p.log_distance}, {"value", p.value},
                       {"gamma_g", p.gamma_g}, {"xi_g", p.xi_g}, {"converged", p.converged}});
      print(out, {{"eta_c", f.eta_c},
                  {"slope", f.slope},
                  {"intercept", f.intercept},
                  {"correlation", f.correlation},
                  {"used", f.used},
                  {"max_abs_gamma_g", f.max_abs_gamma_g},
                  {"points", pts}});
      return ok;
    });
  }

  // q-map
  {
    auto* sub = app.add_subcommand("q-map", "Numeric vs analytic Q over a (Delta_x, Delta_y) grid of the two-level model");
    auto flags = std::make_shared<TwoLevelFlags>();
    flags->p = {1.0, 1.0, 0.5, 0.0, 0.0, 0.0, pi / 2};
    auto dx = std::make_shared<std::string>("0:3:21");
    auto dy = std::make_shared<std::string>("0:3:21");
    auto samples = std::make_shared<std::size_t>(256);
    sub->add_option("--hx", flags->p.hx, "Hermitian field h_x (energy units)");
    sub->add_option("--hy", flags->p.hy, "Hermitian field h_y (energy units)");
    sub->add_option("--hz", flags->p.hz, "Hermitian field h_z (energy units)");
    sub->add_option("--dz", flags->p.dz, "anti-Hermitian field Delta_z (energy units)");
    sub->add_option("--theta", flags->p.theta, "polar angle of the loop (rad)");
    sub->add_option("--dx", *dx, "Delta_x axis as min:max:count (energy units)");
    sub->add_option("--dy", *dy, "Delta_y axis as min:max:count (energy units)");
    sub->add_option("--samples", *samples, "initial loop resolution (power of two >= 16)");
    commands.emplace_back(sub, [=, &out] {
      flags->p.validate();
      const QMap m = two_level_q_map(flags->p, AxisRange::parse(*dx), AxisRange::parse(*dy), *samples);
      json rows = json::array();
      for (const auto& c : m.cells)
        rows.push_back({{"dx", c.dx},
                        {"dy", c.dy},
                        {"Q_analytic", c.analytic ? json(*c.analytic) : json(nullptr)},
                        {"Q_numeric", c.numeric ? json(*c.numeric) : json(nullptr)},
                        {"mismatch", c.mismatch}});
      print(out, {{"mismatches", m.mismatches}, {"cells", rows}});
      return ok;
    });
  }

  std::vector<std::string> argv_store{"berryline"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : argv_store) argv.push_back(s.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? ok : malformed;
  }

  for (auto& [sub, action] : commands) {
    if (!sub->parsed()) continue;
    try {
      return action();
    } catch (const NotConverged& e) {
      err << "error: " << e.what() << '\n';
      return not_converged;
    } catch (const std::exception& e) {
      err << "error: " << e.what() << '\n';
      return exit_code_for(e);
    }
  }
  return malformed;
}

}  // namespace berryline::cli
