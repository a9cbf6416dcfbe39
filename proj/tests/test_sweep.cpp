#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "berryline/errors.hpp"
#include "berryline/spectrum.hpp"
#include "berryline/sweep.hpp"

using namespace berryline;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

// Inequality labels, away from the boundary lines.
Region expected_region(double q, double eta) {
  if (eta < std::abs(q - 1)) return Region::type_i;
  if (eta > q + 1) return Region::type_ii;
  return Region::gapless_true_crossing;
}

bool bitwise_equal(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0 || (std::isnan(a) && std::isnan(b)); }

struct ScopedEnv {
  std::string name;
  ScopedEnv(std::string n, const char* value) : name(std::move(n)) { ::setenv(name.c_str(), value, 1); }
  ~ScopedEnv() { ::unsetenv(name.c_str()); }
};

}  // namespace

TEST_CASE("axis ranges") {
  const auto v = AxisRange::parse("0.5:1.5:5").values();
  REQUIRE(v.size() == 5);
  CHECK(v.front() == 0.5);
  CHECK(v.back() == 1.5);
  CHECK(v[2] == doctest::Approx(1.0));
  CHECK(AxisRange::parse("2:2:1").values() == std::vector<double>{2.0});
  CHECK_THROWS_AS(AxisRange::parse("1:0:3"), InvalidArgument);
  CHECK_THROWS_AS(AxisRange::parse("0:1"), InvalidArgument);
  CHECK_THROWS_AS(AxisRange::parse("0:1:0"), InvalidArgument);
  CHECK_THROWS_AS(AxisRange::parse("a:1:3"), InvalidArgument);
  CHECK_THROWS_AS(AxisRange::parse("0:nan:3"), InvalidArgument);
  CHECK_THROWS_AS(AxisRange::parse("0:0:3"), InvalidArgument);
}

TEST_CASE("worker count") {
  CHECK(worker_count(3) == 3);
  {
    ScopedEnv env("BERRYLINE_THREADS", "2");
    CHECK(worker_count() == 2);
    CHECK(worker_count(5) == 5);
  }
  {
    ScopedEnv env("BERRYLINE_THREADS", "0");
    CHECK_THROWS_AS(worker_count(), InvalidArgument);
  }
  CHECK(worker_count() >= 1);
}

TEST_CASE("trivial and topological corners of the diagram") {
  const PhaseDiagramGrid a = phase_diagram({0.4, 0.6, 3}, {0.0, 0.1, 3});
  REQUIRE(a.cells.size() == 9);
  for (const auto& c : a.cells) {
    CHECK(c.converged);
    CHECK(std::abs(c.q_index) < 1e-6);
  }
  const PhaseDiagramGrid b = phase_diagram({1.5, 2.5, 3}, {0.0, 0.1, 3});
  for (const auto& c : b.cells) {
    CHECK(c.converged);
    CHECK(std::abs(c.q_index - 1) < 1e-6);
    CHECK(c.gamma_g_plus == doctest::Approx(pi).epsilon(1e-9));
    CHECK(c.gamma_g_minus == doctest::Approx(pi).epsilon(1e-9));
  }
}

TEST_CASE("cells equal direct point calls bitwise") {
  const PhaseDiagramGrid g = phase_diagram({0.3, 2.7, 5}, {0.1, 3.0, 4}, {256, 3, {}});
  for (std::size_t ie = 0; ie < g.eta_axis.size(); ++ie)
    for (std::size_t iq = 0; iq < g.q_axis.size(); ++iq) {
      const PhaseCell& c = g.at(iq, ie);
      const PhaseCell d = bipartite_point(g.q_axis[iq], g.eta_axis[ie]);
      CHECK(bitwise_equal(c.gamma_g_plus, d.gamma_g_plus));
      CHECK(bitwise_equal(c.xi_g_plus, d.xi_g_plus));
      CHECK(bitwise_equal(c.gamma_g_minus, d.gamma_g_minus));
      CHECK(bitwise_equal(c.xi_g_minus, d.xi_g_minus));
      CHECK(bitwise_equal(c.q_index, d.q_index));
      CHECK(c.region == d.region);
    }
}

TEST_CASE("converged cells are quantized and labelled consistently") {
  const PhaseDiagramGrid g = phase_diagram({0.05, 3.0, 24}, {0.0, 4.5, 19});
  std::size_t converged = 0;
  for (const auto& c : g.cells) {
    if (c.converged) {
      ++converged;
      CHECK(std::abs(c.q_index - std::round(c.q_index)) < 1e-6);
    }
    CHECK(c.region == classify_region(c.q, c.eta).region);
    const double margin = std::min({std::abs(c.eta - std::abs(c.q - 1)), std::abs(c.eta - c.q - 1)});
    if (margin > 1e-9) CHECK(c.region == expected_region(c.q, c.eta));
  }
  CHECK(converged > g.cells.size() * 9 / 10);
}

TEST_CASE("q = 1 grid points are shifted off the transition") {
  const PhaseDiagramGrid g = phase_diagram({0.5, 1.5, 5}, {0.0, 0.2, 2});
  CHECK(g.q_offset == doctest::Approx(0.125));
  for (double q : g.q_axis) CHECK(std::abs(q - 1) > 0.1);
  for (std::size_t i = 1; i < g.q_axis.size(); ++i) CHECK(g.q_axis[i] > g.q_axis[i - 1]);
  const PhaseDiagramGrid s = phase_diagram({0.9, 1.2, 3}, {0.0, 0.1, 2});
  CHECK(s.q_offset == 0.0);
  for (std::size_t ie = 0; ie < 2; ++ie) {
    CHECK(s.at(1, ie).straddles_transition);
    CHECK_FALSE(s.at(1, ie).converged);
    CHECK_FALSE(s.at(0, ie).straddles_transition);
  }
}

TEST_CASE("pi step across the transition") {
  for (double eta : {0.0, 0.005, 0.01}) {
    const double up = bipartite_point(1.05, eta).gamma_g_plus;
    const double down = bipartite_point(0.95, eta).gamma_g_plus;
    CHECK(std::abs(up - down - pi) < 1e-4);
  }
}

TEST_CASE("CSV layout and determinism") {
  const auto dir = std::filesystem::temp_directory_path() / "berryline_sweep_test";
  std::filesystem::create_directories(dir);
  ScopedEnv env("SOURCE_DATE_EPOCH", "1700000000");
  const AxisRange q{0.2, 2.2, 4}, eta{0.0, 2.5, 3};
  write_phase_diagram(phase_diagram(q, eta, {256, 1, {}}), q, eta, dir / "a.csv");
  write_phase_diagram(phase_diagram(q, eta, {256, 3, {}}), q, eta, dir / "b.csv");
  const std::string a = slurp(dir / "a.csv"), b = slurp(dir / "b.csv");
  CHECK(a == b);
  CHECK(slurp(dir / "a.csv.json") == slurp(dir / "b.csv.json"));

  const auto rows = lines(a);
  REQUIRE(rows.size() == 13);
  CHECK(rows[0] == "q,eta,gamma_g_plus,xi_g_plus,gamma_g_minus,xi_g_minus,Q,region,converged");
  // eta outer, q inner
  CHECK(rows[1].rfind("0.20000000000000001,0,", 0) == 0);
  CHECK(rows[2].rfind("0.8666666666666667", 0) == 0);
  CHECK(rows[5].find(",1.25,") != std::string::npos);

  const auto side = nlohmann::json::parse(slurp(dir / "a.csv.json"));
  CHECK(side["timestamp"] == "2023-11-14T22:13:20Z");
  CHECK(side["axes"]["q"].size() == 4);
  CHECK(side["axes"]["eta"].size() == 3);
  CHECK(side["cells"] == 12);
  std::filesystem::remove_all(dir);
}

TEST_CASE("logarithmic divergence at d2") {
  const DivergenceFit f = divergence_scan(0.5, CriticalLine::d2, 8);
  CHECK(f.eta_c == 0.5);
  CHECK(f.used >= 6);
  CHECK(f.correlation >= 0.999);
  CHECK(f.slope > 0);
  // gamma^g jumps finitely at d2
  CHECK(f.max_abs_gamma_g < 10);
  for (const auto& p : f.points) CHECK(p.eta < 0.5);
}

TEST_CASE("logarithmic divergence at d1") {
  const DivergenceFit f = divergence_scan(0.5, CriticalLine::d1, 8);
  CHECK(f.eta_c == 1.5);
  CHECK(f.used >= 6);
  CHECK(f.correlation >= 0.99);
  CHECK(f.slope > 0);
  for (std::size_t i = 1; i < f.points.size(); ++i) CHECK(f.points[i].value > f.points[i - 1].value);
}

TEST_CASE("divergence scan preconditions") {
  CHECK_THROWS_AS(divergence_scan(1.0, CriticalLine::d2, 8), InvalidArgument);
  CHECK_THROWS_AS(divergence_scan(0.5, CriticalLine::d2, 3), NotConverged);
}

TEST_CASE("two-level Q map sign structure") {
  const TwoLevelParams base{1, 1, 0.5, 0, 0, 0.2, 1.0};
  const QMap m = two_level_q_map(base, {0.0, 3.0, 31}, {0.0, 3.0, 31});
  CHECK(m.at(0, 0).numeric_rounded == 1);
  CHECK(m.at(0, 0).analytic == 1);
  std::size_t undefined = 0;
  for (const auto& c : m.cells) {
    const bool on_line = std::abs(c.dx - 1) < 1e-12 || std::abs(c.dy - 1) < 1e-12;
    if (on_line) {
      CHECK_FALSE(c.analytic.has_value());
      CHECK_FALSE(c.numeric.has_value());
      ++undefined;
      continue;
    }
    const int expected = (c.dx * c.dx - 1) * (c.dy * c.dy - 1) > 0 ? 1 : 0;
    CHECK(c.numeric_rounded == expected);
  }
  CHECK(undefined == 61);
  CHECK(m.mismatches == 0);

  // Off-line grid: every cell sits at least 0.05 from dx = 1 and dy = 1.
  const QMap off = two_level_q_map(base, {0.025, 2.975, 21}, {0.025, 2.975, 21});
  CHECK(off.mismatches == 0);
  for (const auto& c : off.cells) CHECK(c.numeric_rounded.has_value());
}
