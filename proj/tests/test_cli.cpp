#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "traffic/cli.hpp"
#include "traffic/experiments.hpp"

using namespace traffic;
using namespace traffic::cli;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome invoke(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("traffic_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int count_lines(const std::string& s) {
  int n = 0;
  for (char c : s) n += c == '\n';
  return n;
}

}  // namespace

TEST_CASE("no arguments prints usage and exits 2") {
  const auto r = invoke({});
  CHECK(r.code == kExitUsage);
  CHECK(r.err.find("Usage") != std::string::npos);
}

TEST_CASE("help exits 0") {
  const auto r = invoke({"preset", "--help"});
  CHECK(r.code == kExitOk);
  CHECK(r.out.find("--id") != std::string::npos);
}

TEST_CASE("unknown flags and bad values are usage errors") {
  CHECK(invoke({"preset", "--id", "ex1", "--bogus"}).code == kExitUsage);
  CHECK(invoke({"preset", "--id", "ex9"}).code == kExitUsage);
  CHECK(invoke({"run", "--model", "lwr", "--out", "x.csv"}).code == kExitUsage);
  CHECK(invoke({"converge", "--levels", "2"}).code == kExitUsage);
  CHECK(invoke({"micro", "--n", "1", "--out", "m.csv"}).code == kExitUsage);
}

TEST_CASE("run validates the density bound before computing") {
  const auto dir = scratch_dir("bound");
  const auto r = invoke({"run", "--model", "ar", "--rho-l", "1", "--u-l", "0", "--rho-r", "0.5",
                         "--u-r", "0", "--x0", "0.5", "--dx", "0.01", "--t-end", "0.1", "--out",
                         (dir / "r.csv").string()});
  CHECK(r.code == kExitUsage);
  CHECK(r.err.find("rho_l") != std::string::npos);
  CHECK(r.err.find("rho_max") != std::string::npos);
  CHECK_FALSE(fs::exists(dir / "r.csv"));
}

TEST_CASE("run writes the final state and echoes the path") {
  const auto dir = scratch_dir("run");
  const auto path = (dir / "r.csv").string();
  const auto r = invoke({"run", "--model", "hj", "--rho-l", "0.5", "--u-l", "0", "--rho-r", "0.9",
                         "--u-r", "0.5", "--x0", "0.5", "--dx", "0.01", "--t-end", "0.1",
                         "--out", path, "--quiet"});
  REQUIRE(r.code == kExitOk);
  CHECK(r.out == path + "\n");
  const auto rows = experiments::read_csv(path);
  CHECK(rows.size() == 100);
  CHECK(rows.front().model == "hj");
  CHECK(rows.front().t == 0.1);
}

TEST_CASE("runtime failures exit 1") {
  const auto r = invoke({"oracle", "--id", "ex1", "--out", "/nonexistent-dir/o.csv"});
  CHECK(r.code == kExitRuntime);
  CHECK(r.err.find("/nonexistent-dir/o.csv") != std::string::npos);
}

TEST_CASE("preset writes every run and oracle CSV") {
  const auto dir = scratch_dir("preset");
  const auto r = invoke({"preset", "--id", "ex1", "--out", dir.string()});
  REQUIRE(r.code == kExitOk);
  int csvs = 0;
  for (const auto& e : fs::directory_iterator(dir)) csvs += e.path().extension() == ".csv";
  CHECK(csvs >= 4);
  CHECK(fs::exists(dir / "ex1_ar-cons_0.001.csv"));
  CHECK(fs::exists(dir / "ex1_hj_0.01.csv"));
  CHECK(r.out.find((dir / "ex1_oracle_0.001.csv").string()) != std::string::npos);

  const auto quiet = invoke({"preset", "--id", "ex2", "--dx", "0.01", "--models", "ar,hj",
                             "--out", dir.string(), "--quiet"});
  REQUIRE(quiet.code == kExitOk);
  CHECK(count_lines(quiet.out) == 3);
}

TEST_CASE("oracle, micro and converge subcommands") {
  const auto dir = scratch_dir("misc");
  auto r = invoke({"oracle", "--id", "ex4", "--t", "0.3", "--dx", "0.01", "--out",
                   (dir / "o.csv").string()});
  REQUIRE(r.code == kExitOk);
  const auto rows = experiments::read_csv(dir / "o.csv");
  CHECK(rows.size() == 100);
  CHECK(rows.front().t == 0.3);

  r = invoke({"micro", "--model", "rf", "--n", "50", "--dx", "0.01", "--out",
              (dir / "m.csv").string(), "-q"});
  REQUIRE(r.code == kExitOk);
  CHECK(experiments::read_csv(dir / "m.csv").front().model == "micro-rf");

  r = invoke({"converge", "--model", "ar", "--levels", "3", "--n0", "50"});
  REQUIRE(r.code == kExitOk);
  CHECK(r.out.find("mean_order_excluded=") != std::string::npos);
}

TEST_CASE("config files") {
  CHECK(parse_config_text("").n_cells == SimulationConfig{}.n_cells);
  CHECK(parse_config_text("dx = 0.001\n").n_cells == 1000);
  const auto c = parse_config_text(
      "# Example 3\nmodel = hj\nrho_l = 0.5   # left\nu_l = 0\nrho_r = 0.9\nu_r = 0.5\n"
      "x_lo = -1\ndx = 0.01\nt_end = 0.4\nv_ref = 2\n");
  CHECK(c.model == ModelKind::HamiltonJacobi);
  CHECK(c.n_cells == 200);
  CHECK(c.t_end == 0.4);
  CHECK(c.params.v_ref == 2.0);
  CHECK(std::get<RiemannData>(c.initial_condition).right.rho == 0.9);

  CHECK_THROWS_WITH_AS(parse_config_text("dx = 0.01\n\nthis is not a pair\n", {}, "f.cfg"),
                       doctest::Contains("f.cfg:3"), UsageError);
  CHECK_THROWS_WITH_AS(parse_config_text("colour = red\n"), doctest::Contains(":1"), UsageError);
  CHECK_THROWS_WITH_AS(parse_config_text("\ncfl = fast\n"), doctest::Contains(":2"), UsageError);

  const auto dir = scratch_dir("config");
  std::ofstream(dir / "empty.cfg") << "";
  CHECK(load_config(dir / "empty.cfg").cfl_number == SimulationConfig{}.cfl_number);
  CHECK_THROWS_AS(load_config(dir / "missing.cfg"), UsageError);
}

TEST_CASE("flags override the config file") {
  const auto dir = scratch_dir("override");
  std::ofstream(dir / "run.cfg") << "model = ar\nrho_l = 0.5\nu_l = 1\nrho_r = 0.5\nu_r = 0\n"
                                    "dx = 0.01\nt_end = 0.05\n";
  const auto out = (dir / "r.csv").string();
  const auto cmd = parse_args({"--config", (dir / "run.cfg").string(), "run", "--model", "hj",
                               "--t-end", "0.1", "--out", out});
  CHECK(cmd.subcommand == Subcommand::Run);
  CHECK(cmd.run.config.model == ModelKind::HamiltonJacobi);
  CHECK(cmd.run.config.t_end == 0.1);
  CHECK(cmd.run.config.n_cells == 100);
  CHECK(cmd.run.config.cfl_number == 0.5);
  CHECK(std::get<RiemannData>(cmd.run.config.initial_condition).left.u == 1.0);

  std::ofstream(dir / "bad.cfg") << "rho_l = 2\n";
  const auto r = invoke({"run", "--config", (dir / "bad.cfg").string(), "--out", out});
  CHECK(r.code == kExitUsage);
}

TEST_CASE("the executable maps errors to exit codes") {
  const std::string exe = TRAFFICSIM_EXE;
  auto status = [](const std::string& cmd) {
    const int raw = std::system((cmd + " >/dev/null 2>&1").c_str());
    return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  };
  CHECK(status(exe) == 2);
  CHECK(status(exe + " run --rho-l 1 --out /tmp/x.csv") == 2);
  CHECK(status(exe + " oracle --id ex2 --out /nonexistent-dir/o.csv") == 1);
  const auto dir = scratch_dir("exe");
  CHECK(status(exe + " oracle --id ex2 --out " + (dir / "o.csv").string()) == 0);
}
