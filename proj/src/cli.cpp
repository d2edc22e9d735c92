#include "traffic/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <sstream>

#include "traffic/experiments.hpp"
#include "traffic/macro_solver.hpp"
#include "traffic/riemann.hpp"

namespace traffic::cli {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

double to_double(const std::string& s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw std::invalid_argument("not a number: '" + s + "'");
  return v;
}

int to_int(const std::string& s) {
  int v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw std::invalid_argument("not an integer: '" + s + "'");
  return v;
}

RiemannData& riemann_of(SimulationConfig& c) {
  if (!std::holds_alternative<RiemannData>(c.initial_condition)) c.initial_condition = RiemannData{};
  return std::get<RiemannData>(c.initial_condition);
}

void set_cells_from_dx(SimulationConfig& c, double dx) {
  if (!(dx > 0.0)) throw std::invalid_argument("dx must be positive");
  c.n_cells = static_cast<int>(std::lround((c.x_hi - c.x_lo) / dx));
}

CoefficientForm parse_coefficients(const std::string& s) {
  if (s == "simplified") return CoefficientForm::Simplified;
  if (s == "general") return CoefficientForm::General;
  throw std::invalid_argument("coefficients must be 'simplified' or 'general'");
}

Boundary parse_boundary(const std::string& s) {
  if (s == "outflow") return Boundary::Outflow;
  if (s == "periodic") return Boundary::Periodic;
  throw std::invalid_argument("boundary must be 'outflow' or 'periodic'");
}

using Setter = std::function<void(SimulationConfig&, const std::string&)>;

const std::map<std::string, Setter, std::less<>>& config_keys() {
  static const std::map<std::string, Setter, std::less<>> keys = [] {
    std::map<std::string, Setter, std::less<>> k;
    auto param = [&k](const char* name, double ModelParameters::*field) {
      k[name] = [field](SimulationConfig& c, const std::string& v) { c.params.*field = to_double(v); };
    };
    param("H", &ModelParameters::H);
    param("H_A", &ModelParameters::H_A);
    param("H_B", &ModelParameters::H_B);
    param("v_ref", &ModelParameters::v_ref);
    param("w", &ModelParameters::w);
    param("q_A", &ModelParameters::q_A);
    param("q_B", &ModelParameters::q_B);
    param("alpha", &ModelParameters::alpha);
    param("beta", &ModelParameters::beta);
    param("c_eta", &ModelParameters::c_eta);
    param("C_limit", &ModelParameters::C_limit);
    k["eta"] = [](SimulationConfig& c, const std::string& v) { c.params.eta = to_int(v); };
    k["model"] = [](SimulationConfig& c, const std::string& v) { c.model = parse_model_kind(v); };
    k["coefficients"] = [](SimulationConfig& c, const std::string& v) {
      c.coefficients = parse_coefficients(v);
    };
    k["boundary"] = [](SimulationConfig& c, const std::string& v) { c.boundary = parse_boundary(v); };
    k["rho_l"] = [](SimulationConfig& c, const std::string& v) { riemann_of(c).left.rho = to_double(v); };
    k["u_l"] = [](SimulationConfig& c, const std::string& v) { riemann_of(c).left.u = to_double(v); };
    k["rho_r"] = [](SimulationConfig& c, const std::string& v) { riemann_of(c).right.rho = to_double(v); };
    k["u_r"] = [](SimulationConfig& c, const std::string& v) { riemann_of(c).right.u = to_double(v); };
    k["x0"] = [](SimulationConfig& c, const std::string& v) { riemann_of(c).x0 = to_double(v); };
    k["x_lo"] = [](SimulationConfig& c, const std::string& v) { c.x_lo = to_double(v); };
    k["x_hi"] = [](SimulationConfig& c, const std::string& v) { c.x_hi = to_double(v); };
    k["dx"] = [](SimulationConfig& c, const std::string& v) { set_cells_from_dx(c, to_double(v)); };
    k["n_cells"] = [](SimulationConfig& c, const std::string& v) { c.n_cells = to_int(v); };
    k["t_end"] = [](SimulationConfig& c, const std::string& v) { c.t_end = to_double(v); };
    k["cfl"] = [](SimulationConfig& c, const std::string& v) { c.cfl_number = to_double(v); };
    return k;
  }();
  return keys;
}

std::vector<ModelKind> parse_models(const std::vector<std::string>& names) {
  std::vector<ModelKind> out;
  for (const auto& n : names) out.push_back(parse_model_kind(n));
  return out;
}

std::string join_models(const std::vector<ModelKind>& models) {
  std::string s;
  for (ModelKind m : models) {
    if (!s.empty()) s += ',';
    s += model_name(m);
  }
  return s;
}

void progress(const CliCommand& cmd, std::ostream& out, const std::string& line) {
  if (!cmd.quiet) out << line << '\n';
}

// Command-line values held until the config file (if any) has been applied.
struct RawFlags {
  std::string model;
  std::string coefficients;
  std::string boundary;
  double rho_l = 0, u_l = 0, rho_r = 0, u_r = 0, x0 = 0, dx = 0, t_end = 0, cfl = 0;
  double v_ref = 0, H = 0, C_limit = 0;
};

std::string read_config_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw UsageError("cannot read config file '" + path.string() + "'");
  std::ostringstream buf;
  buf << is.rdbuf();
  return buf.str();
}

}  // namespace

SimulationConfig parse_config_text(std::string_view text, SimulationConfig base,
                                   std::string_view source) {
  std::istringstream is{std::string(text)};
  std::string raw;
  std::size_t lineno = 0;
  // dx is applied last so that it refers to the final domain bounds.
  std::optional<std::pair<std::string, std::size_t>> dx_entry;
  auto fail = [&](std::size_t line, const std::string& why) {
    std::ostringstream os;
    os << source << ":" << line << ": " << why;
    throw UsageError(os.str());
  };
  while (std::getline(is, raw)) {
    ++lineno;
    std::string line = raw.substr(0, raw.find('#'));
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(lineno, "expected 'key = value', got '" + line + "'");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    if (key.empty() || value.empty()) fail(lineno, "expected 'key = value', got '" + line + "'");
    const auto it = config_keys().find(key);
    if (it == config_keys().end()) fail(lineno, "unknown key '" + key + "'");
    if (key == "dx") {
      dx_entry = {value, lineno};
      continue;
    }
    try {
      it->second(base, value);
    } catch (const std::exception& e) {
      fail(lineno, key + ": " + e.what());
    }
  }
  if (dx_entry) {
    try {
      set_cells_from_dx(base, to_double(dx_entry->first));
    } catch (const std::exception& e) {
      fail(dx_entry->second, std::string("dx: ") + e.what());
    }
  }
  return base;
}

SimulationConfig load_config(const std::filesystem::path& path) {
  return parse_config_text(read_config_file(path), {}, path.string());
}

CliCommand parse_args(const std::vector<std::string>& args) {
  CliCommand cmd;
  CLI::App app{"Macroscopic and microscopic traffic-flow simulations", "trafficsim"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path;
  app.add_option("--config", config_path, "key = value config file (flags override it)");
  app.add_flag("--quiet,-q", cmd.quiet, "suppress progress lines");

  // run
  RawFlags f;
  auto* run = app.add_subcommand("run", "solve one Riemann problem and write the final state");
  auto* o_model = run->add_option("--model", f.model, "ar | hj | merged | ar-cons")
                      ->check(CLI::IsMember({"ar", "hj", "merged", "ar-cons"}));
  auto* o_rho_l = run->add_option("--rho-l", f.rho_l, "left density");
  auto* o_u_l = run->add_option("--u-l", f.u_l, "left velocity");
  auto* o_rho_r = run->add_option("--rho-r", f.rho_r, "right density");
  auto* o_u_r = run->add_option("--u-r", f.u_r, "right velocity");
  auto* o_x0 = run->add_option("--x0", f.x0, "initial discontinuity");
  auto* o_dx = run->add_option("--dx", f.dx, "cell width on [0, 1]");
  auto* o_t_end = run->add_option("--t-end", f.t_end, "final time");
  auto* o_cfl = run->add_option("--cfl", f.cfl, "CFL number (default 0.5)");
  auto* o_coef = run->add_option("--coefficients", f.coefficients, "simplified | general")
                     ->check(CLI::IsMember({"simplified", "general"}));
  auto* o_bc = run->add_option("--boundary", f.boundary, "outflow | periodic")
                   ->check(CLI::IsMember({"outflow", "periodic"}));
  auto* o_v_ref = run->add_option("--v-ref", f.v_ref, "reference velocity");
  auto* o_H = run->add_option("--H", f.H, "vehicle length");
  auto* o_C = run->add_option("--c-limit", f.C_limit, "gradient cap of the merged model");
  run->add_option("--out", cmd.run.out, "output CSV path")->required();

  // preset
  auto* pre = app.add_subcommand("preset", "run one of the four Riemann examples");
  std::vector<std::string> preset_models;
  std::vector<double> preset_dx;
  pre->add_option("--id", cmd.preset.id, "ex1 | ex2 | ex3 | ex4")
      ->required()
      ->check(CLI::IsMember({"ex1", "ex2", "ex3", "ex4"}));
  pre->add_option("--models", preset_models, "comma-separated model list")->delimiter(',');
  pre->add_option("--dx", preset_dx, "comma-separated cell widths")->delimiter(',');
  pre->add_option("--out", cmd.preset.out_dir, "output directory");
  pre->add_option("--cfl", cmd.preset.cfl, "CFL number");

  // oracle
  auto* ora = app.add_subcommand("oracle", "sample the exact Aw-Rascle solution of an example");
  ora->add_option("--id", cmd.oracle.id, "ex1 | ex2 | ex3 | ex4")
      ->required()
      ->check(CLI::IsMember({"ex1", "ex2", "ex3", "ex4"}));
  auto* o_t = ora->add_option("--t", cmd.oracle.t, "sample time (default: the example's t_end)");
  ora->add_option("--dx", cmd.oracle.dx, "cell width on [0, 1]");
  ora->add_option("--out", cmd.oracle.out, "output CSV path")->required();

  // micro
  auto* mic = app.add_subcommand("micro", "car-following run on an example's Riemann data");
  std::string micro_model = "rf";
  std::string micro_id = "ex1";
  double micro_dx = 0.001;
  double micro_t = -1.0;
  auto& mc = cmd.micro.config;
  mc.platoon_lo = -0.5;
  mc.platoon_hi = 1.5;
  mic->add_option("--model", micro_model, "rf | hj")->check(CLI::IsMember({"rf", "hj"}));
  mic->add_option("--n", mc.n_cars, "number of cars")->required();
  mic->add_option("--id", micro_id, "example supplying the Riemann data")
      ->check(CLI::IsMember({"ex1", "ex2", "ex3", "ex4"}));
  mic->add_option("--t-end", micro_t, "final time (default: the example's t_end)");
  mic->add_option("--platoon-lo", mc.platoon_lo, "rear end of the initial platoon");
  mic->add_option("--platoon-hi", mc.platoon_hi, "front end of the initial platoon");
  mic->add_option("--max-dt", mc.max_dt, "largest RK4 step");
  mic->add_option("--dx", micro_dx, "reconstruction cell width on [0, 1]");
  mic->add_option("--out", cmd.micro.out, "output CSV path")->required();

  // converge
  auto* con = app.add_subcommand("converge", "self-convergence study on periodic sine data");
  std::string converge_model = "ar";
  auto* o_cmodel = con->add_option("--model", converge_model, "ar | hj | merged | ar-cons")
                       ->check(CLI::IsMember({"ar", "hj", "merged", "ar-cons"}));
  con->add_option("--levels", cmd.converge.levels, "number of grids (>= 3)");
  con->add_option("--n0", cmd.converge.n0, "cells on the coarsest grid");
  con->add_option("--t-end", cmd.converge.t_end, "final time");
  double converge_cfl = 0.45;
  auto* o_ccfl = con->add_option("--cfl", converge_cfl, "CFL number");
  con->add_option("--radius", cmd.converge.exclusion_radius, "extremum exclusion radius");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    cmd.help = true;
    cmd.help_text = app.help();
    for (auto* sub : {run, pre, ora, mic, con})
      if (sub->parsed()) cmd.help_text = sub->help();
    return cmd;
  } catch (const CLI::ParseError& e) {
    std::string usage = app.help();
    for (auto* sub : {run, pre, ora, mic, con})
      if (sub->parsed()) usage = sub->help();
    throw UsageError(e.what(), usage);
  }

  if (!config_path.empty()) cmd.config_path = config_path;
  try {
    if (run->parsed()) {
      cmd.subcommand = Subcommand::Run;
      SimulationConfig c;
      c.cfl_number = 0.5;
      if (cmd.config_path) c = parse_config_text(read_config_file(*cmd.config_path), c, config_path);
      if (*o_model) c.model = parse_model_kind(f.model);
      if (*o_coef) c.coefficients = parse_coefficients(f.coefficients);
      if (*o_bc) c.boundary = parse_boundary(f.boundary);
      if (*o_H) c.params.H = f.H;
      if (*o_v_ref) c.params.v_ref = f.v_ref;
      if (*o_C) c.params.C_limit = f.C_limit;
      if (*o_rho_l) riemann_of(c).left.rho = f.rho_l;
      if (*o_u_l) riemann_of(c).left.u = f.u_l;
      if (*o_rho_r) riemann_of(c).right.rho = f.rho_r;
      if (*o_u_r) riemann_of(c).right.u = f.u_r;
      if (*o_x0) riemann_of(c).x0 = f.x0;
      if (*o_dx) set_cells_from_dx(c, f.dx);
      if (*o_t_end) c.t_end = f.t_end;
      if (*o_cfl) c.cfl_number = f.cfl;
      validate(c);
      cmd.run.config = c;
    } else if (pre->parsed()) {
      cmd.subcommand = Subcommand::Preset;
      if (cmd.config_path) throw UsageError("--config applies to 'run' and 'converge' only");
      const auto p = experiments::preset(cmd.preset.id);
      cmd.preset.models = preset_models.empty() ? p.models : parse_models(preset_models);
      cmd.preset.resolutions = preset_dx.empty() ? p.resolutions : preset_dx;
      for (double dx : cmd.preset.resolutions)
        validate(experiments::make_config(p, ModelKind::AwRascleType, dx, cmd.preset.cfl));
      if (!(cmd.preset.cfl > 0.0 && cmd.preset.cfl <= 0.5))
        throw ConfigError("cfl must lie in (0, 0.5]");
    } else if (ora->parsed()) {
      cmd.subcommand = Subcommand::Oracle;
      if (cmd.config_path) throw UsageError("--config applies to 'run' and 'converge' only");
      const auto p = experiments::preset(cmd.oracle.id);
      if (!*o_t) cmd.oracle.t = p.t_end;
      if (!(cmd.oracle.t >= 0.0)) throw ConfigError("t must be >= 0");
      validate(experiments::make_config(p, ModelKind::AwRascleType, cmd.oracle.dx));
    } else if (mic->parsed()) {
      cmd.subcommand = Subcommand::Micro;
      if (cmd.config_path) throw UsageError("--config applies to 'run' and 'converge' only");
      const auto p = experiments::preset(micro_id);
      mc.model = micro_model == "rf" ? micro::FollowModel::RascleFollow : micro::FollowModel::HJFollow;
      mc.initial = p.data;
      mc.t_end = micro_t < 0.0 ? p.t_end : micro_t;
      mc.grid_lo = p.x_lo;
      mc.grid_hi = p.x_hi;
      if (!(micro_dx > 0.0)) throw ConfigError("dx must be positive");
      mc.grid_cells = static_cast<std::size_t>(std::lround((p.x_hi - p.x_lo) / micro_dx));
      if (mc.n_cars < 2) throw ConfigError("n must be at least 2");
      if (!(mc.platoon_lo < p.data.x0 && p.data.x0 < mc.platoon_hi))
        throw ConfigError("platoon must contain the initial discontinuity");
      if (!(mc.max_dt > 0.0)) throw ConfigError("max-dt must be positive");
      if (mc.grid_cells == 0) throw ConfigError("dx too large");
    } else {
      cmd.subcommand = Subcommand::Converge;
      auto& cv = cmd.converge;
      if (cmd.config_path) {
        const SimulationConfig c = load_config(*cmd.config_path);
        cv.model = c.model;
        cv.params = c.params;
        cv.cfl = c.cfl_number;
      }
      if (*o_cmodel || !cmd.config_path) cv.model = parse_model_kind(converge_model);
      if (*o_ccfl || !cmd.config_path) cv.cfl = converge_cfl;
      validate(cv.params);
      if (cv.levels < 3) throw ConfigError("levels must be at least 3");
      if (cv.n0 < 10) throw ConfigError("n0 must be at least 10");
      if (!(cv.t_end >= 0.0)) throw ConfigError("t-end must be >= 0");
      if (!(cv.cfl > 0.0 && cv.cfl <= 0.5)) throw ConfigError("cfl must lie in (0, 0.5]");
      if (!(cv.exclusion_radius >= 0.0)) throw ConfigError("radius must be >= 0");
    }
  } catch (const UsageError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    CLI::App* sub = run->parsed() ? run : pre->parsed() ? pre : ora->parsed() ? ora
                    : mic->parsed() ? mic : con;
    throw UsageError(e.what(), sub->help());
  }
  return cmd;
}

void execute(const CliCommand& cmd, std::ostream& out) {
  switch (cmd.subcommand) {
    case Subcommand::Run: {
      const auto& c = cmd.run.config;
      progress(cmd, out,
               "run " + std::string(model_name(c.model)) + " cells=" + std::to_string(c.n_cells));
      const auto result = macro::run_macro(c);
      const auto& final_state = result.snapshots.back();
      experiments::write_csv(cmd.run.out,
                             experiments::csv_rows(model_name(c.model), c.dx(), final_state.t,
                                                   c.x_lo, to_primitive(final_state, c.params)));
      std::ostringstream os;
      os << "steps=" << result.steps.size() << " wall=" << result.wall_seconds << "s";
      progress(cmd, out, os.str());
      out << cmd.run.out.string() << '\n';
      break;
    }
    case Subcommand::Preset: {
      const auto p = experiments::preset(cmd.preset.id);
      progress(cmd, out, "preset " + p.id + " models=" + join_models(cmd.preset.models));
      const auto report = experiments::run_comparison(p, cmd.preset.models, cmd.preset.resolutions,
                                                      cmd.preset.out_dir, cmd.preset.cfl);
      for (const auto& r : report.runs) {
        std::ostringstream os;
        if (r.ok)
          os << r.label() << " steps=" << r.steps.size() << " wall=" << r.wall_seconds << "s";
        else
          os << r.label() << " FAILED: " << r.error;
        progress(cmd, out, os.str());
      }
      for (const auto& d : report.distances) {
        std::ostringstream os;
        os << "L1(" << d.a << ", " << d.b << ") = " << d.l1 << "  Linf = " << d.linf;
        progress(cmd, out, os.str());
      }
      for (const auto& path : report.csv_paths) out << path.string() << '\n';
      if (report.partial) throw std::runtime_error("some runs failed; partial results written");
      break;
    }
    case Subcommand::Oracle: {
      const auto p = experiments::preset(cmd.oracle.id);
      const ModelParameters params;
      const auto ws = riemann::solve_riemann(p.data.left, p.data.right, params);
      const auto n = static_cast<std::size_t>(std::lround((p.x_hi - p.x_lo) / cmd.oracle.dx));
      const auto cells = riemann::sample_grid(ws, p.data.x0, cmd.oracle.t, p.x_lo, cmd.oracle.dx, n);
      experiments::write_csv(cmd.oracle.out, experiments::csv_rows("oracle", cmd.oracle.dx,
                                                                   cmd.oracle.t, p.x_lo, cells));
      if (ws.vacuum.present) progress(cmd, out, "vacuum state present");
      out << cmd.oracle.out.string() << '\n';
      break;
    }
    case Subcommand::Micro: {
      const auto& mc = cmd.micro.config;
      const std::string name =
          mc.model == micro::FollowModel::RascleFollow ? "micro-rf" : "micro-hj";
      progress(cmd, out, "micro " + name + " cars=" + std::to_string(mc.n_cars));
      const auto result = micro::run_micro(mc);
      experiments::write_csv(cmd.micro.out,
                             experiments::csv_rows(name, result.dx, result.snapshots.back().t,
                                                   result.grid_lo, result.fields.back()));
      progress(cmd, out, "steps=" + std::to_string(result.steps));
      out << cmd.micro.out.string() << '\n';
      break;
    }
    case Subcommand::Converge: {
      const auto& cv = cmd.converge;
      experiments::ConvergenceSetup setup;
      setup.model = cv.model;
      setup.params = cv.params;
      setup.levels = cv.levels;
      setup.n0 = cv.n0;
      setup.t_end = cv.t_end;
      setup.cfl = cv.cfl;
      setup.exclusion_radius = cv.exclusion_radius;
      const auto r = experiments::convergence_study(setup);
      out << "n_coarse,n_fine,l1,l1_excluded,order,order_excluded\n";
      for (std::size_t i = 0; i < r.errors.size(); ++i) {
        out << r.n_cells[i] << ',' << r.n_cells[i + 1] << ',' << r.errors[i] << ','
            << r.errors_excluded[i] << ',';
        if (i > 0) out << r.orders[i - 1] << ',' << r.orders_excluded[i - 1];
        else out << ',';
        out << '\n';
      }
      out << "mean_order=" << r.mean_order << " mean_order_excluded=" << r.mean_order_excluded
          << '\n';
      break;
    }
  }
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CliCommand cmd;
  try {
    cmd = parse_args(args);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n\n" << e.usage();
    return kExitUsage;
  }
  if (cmd.help) {
    out << cmd.help_text;
    return kExitOk;
  }
  try {
    execute(cmd, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}

}  // namespace traffic::cli
