#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "traffic/experiments.hpp"

using namespace traffic;
using namespace traffic::experiments;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("traffic_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

}  // namespace

TEST_CASE("presets hold the published Riemann data") {
  struct Row {
    const char* id;
    double rl, ul, rr, ur, x0, t;
  };
  const Row rows[] = {{"ex1", 0.5, 1, 0.5, 0, 0.5, 0.2},
                      {"ex2", 0, 1, 0.5, 1, 0.5, 0.2},
                      {"ex3", 0.5, 0, 0.9, 0.5, 0.5, 0.4},
                      {"ex4", 0.5, 0, 0.1, 1, 0.25, 0.5}};
  for (const auto& r : rows) {
    const auto p = preset(r.id);
    CHECK(p.data.left.rho == r.rl);
    CHECK(p.data.left.u == r.ul);
    CHECK(p.data.right.rho == r.rr);
    CHECK(p.data.right.u == r.ur);
    CHECK(p.data.x0 == r.x0);
    CHECK(p.t_end == r.t);
    CHECK(p.x_lo == 0.0);
    CHECK(p.x_hi == 1.0);
    CHECK(p.resolutions == std::vector<double>{0.01, 0.001});
    CHECK(p.models.size() == 2);
  }
  CHECK(preset("ex1").models.front() == ModelKind::ConservativeAwRascle);
  CHECK(preset("ex3").models.front() == ModelKind::AwRascleType);
  CHECK_THROWS_AS(preset("ex5"), ConfigError);
  CHECK(preset_ids().size() == 4);
}

TEST_CASE("make_config") {
  const auto c = make_config(preset("ex4"), ModelKind::HamiltonJacobi, 0.001);
  CHECK(c.n_cells == 1000);
  CHECK(c.t_end == 0.5);
  CHECK(c.cfl_number == 0.45);
  CHECK(std::get<RiemannData>(c.initial_condition).x0 == 0.25);
}

TEST_CASE("metrics") {
  const std::vector<Primitive> a{{0.1, 0}, {0.2, 0}, {0.3, 0}};
  const std::vector<Primitive> b{{0.1, 0}, {0.5, 0}, {0.0, 0}};
  CHECK(l1_distance(a, b, 0.5) == doctest::Approx(0.3));
  CHECK(linf_distance(a, b) == doctest::Approx(0.3));
  CHECK_THROWS(l1_distance(a, {}, 1.0));

  const std::vector<Primitive> fine{{0.0, 0}, {1.0, 0}, {2.0, 0}, {3.0, 0}};
  const auto coarse = resample(fine, 0.0, 0.25, 0.0, 0.5, 2);
  CHECK(coarse[0].rho == doctest::Approx(0.5));
  CHECK(coarse[1].rho == doctest::Approx(2.5));

  const std::vector<Primitive> step{{0.1, 0}, {0.1, 0}, {0.8, 0}, {0.8, 0}};
  CHECK(steepest_gradient_position(step, 0.0, 0.25) == doctest::Approx(0.5));
}

TEST_CASE("CSV round trip is bit exact") {
  const auto dir = scratch_dir("csv");
  std::vector<Primitive> cells;
  for (int i = 0; i < 37; ++i) cells.push_back({std::sqrt(i) / 7.0, 1.0 / (i + 3.0)});
  const auto rows = csv_rows("hj", 0.1 / 3.0, 0.2, -0.1, cells);
  write_csv(dir / "a.csv", rows);
  const auto back = read_csv(dir / "a.csv");
  REQUIRE(back.size() == rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(back[i].x == rows[i].x);
    CHECK(back[i].rho == rows[i].rho);
    CHECK(back[i].u == rows[i].u);
    CHECK(back[i].model == "hj");
    CHECK(back[i].dx == rows[i].dx);
    CHECK(back[i].t == rows[i].t);
  }
  const auto text = slurp(dir / "a.csv");
  CHECK(text.rfind("x,rho,u,model,dx,t\n", 0) == 0);
  CHECK(text.back() == '\n');

  write_csv(dir / "empty.csv", {});
  CHECK(slurp(dir / "empty.csv") == "x,rho,u,model,dx,t\n");
  CHECK(read_csv(dir / "empty.csv").empty());
}

TEST_CASE("CSV errors carry the path") {
  const auto dir = scratch_dir("csv_err");
  CHECK_THROWS_WITH_AS(write_csv(dir / "missing" / "a.csv", {}), doctest::Contains("missing"),
                       IoError);
  CHECK_THROWS_AS(read_csv(dir / "nope.csv"), IoError);
  std::ofstream(dir / "bad.csv") << "x,rho,u,model,dx,t\n1,2,3,ar,4\n";
  CHECK_THROWS_WITH_AS(read_csv(dir / "bad.csv"), doctest::Contains("bad.csv:2"), IoError);
}

TEST_CASE("format_dx") {
  CHECK(format_dx(0.01) == "0.01");
  CHECK(format_dx(0.001) == "0.001");
  CHECK(format_dx(0.005) == "0.005");
}

TEST_CASE("run_comparison on example 2 writes one file per run and oracle") {
  const auto dir = scratch_dir("cmp");
  const auto p = preset("ex2");
  const auto report = run_comparison(p, p.models, p.resolutions, dir);
  CHECK_FALSE(report.partial);
  CHECK(report.runs.size() == 4);
  CHECK(report.oracles.size() == 2);
  CHECK(report.csv_paths.size() == 6);
  CHECK(fs::exists(dir / "ex2_ar_0.001.csv"));
  CHECK(fs::exists(dir / "ex2_hj_0.01.csv"));
  CHECK(fs::exists(dir / "ex2_oracle_0.001.csv"));
  CHECK(read_csv(dir / "ex2_ar_0.001.csv").size() == 1000);
  // 6 entries give 15 unordered pairs.
  CHECK(report.distances.size() == 15);

  // Both models reduce to pure advection at constant u.
  const auto* ar = report.find(ModelKind::AwRascleType, 0.001);
  const auto* hj = report.find(ModelKind::HamiltonJacobi, 0.001);
  REQUIRE(ar);
  REQUIRE(hj);
  CHECK(l1_distance(ar->cells, hj->cells, 0.001) < 0.01);
  for (const auto& s : ar->steps) CHECK(s.courant() <= 0.45 * (1 + 1e-12));
}

TEST_CASE("run_comparison is deterministic") {
  const auto p = preset("ex3");
  const auto d1 = scratch_dir("det1");
  const auto d2 = scratch_dir("det2");
  const std::vector<double> dx{0.01};
  const auto r1 = run_comparison(p, p.models, dx, d1);
  const auto r2 = run_comparison(p, p.models, dx, d2);
  REQUIRE(r1.csv_paths.size() == r2.csv_paths.size());
  for (std::size_t i = 0; i < r1.csv_paths.size(); ++i)
    CHECK(slurp(r1.csv_paths[i]) == slurp(r2.csv_paths[i]));
}

TEST_CASE("run_comparison flags partial results") {
  auto p = preset("ex1");
  const auto report = run_comparison(p, p.models, {0.01}, std::nullopt, 0.9);
  CHECK(report.partial);
  for (const auto& r : report.runs) {
    CHECK_FALSE(r.ok);
    CHECK_FALSE(r.error.empty());
  }
  CHECK(report.oracles.size() == 1);
}

TEST_CASE("convergence study") {
  ConvergenceSetup s;
  s.model = ModelKind::AwRascleType;
  s.profile = [](double x) { return Primitive{0.5 + 0.2 * std::sin(2 * M_PI * x), 0.5}; };
  const auto ar = convergence_study(s);
  CHECK(ar.n_cells == std::vector<int>{100, 200, 400});
  CHECK(ar.errors.size() == 2);
  CHECK(ar.orders.size() == 1);
  CHECK(ar.mean_order_excluded >= 1.5);

  s.model = ModelKind::HamiltonJacobi;
  s.profile = {};
  CHECK(convergence_study(s).mean_order_excluded >= 1.5);

  s.profile = [](double) { return Primitive{0.4, 0.3}; };
  const auto flat = convergence_study(s);
  for (double e : flat.errors) CHECK(e == 0.0);

  s.levels = 2;
  CHECK_THROWS_AS(convergence_study(s), ConfigError);
}
