#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "traffic/core.hpp"
#include "traffic/micro.hpp"

namespace traffic::cli {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

/// Bad command line or config file; maps to exit code 2.
class UsageError : public std::invalid_argument {
 public:
  UsageError(const std::string& what, std::string usage = {})
      : std::invalid_argument(what), usage_(std::move(usage)) {}
  const std::string& usage() const noexcept { return usage_; }

 private:
  std::string usage_;
};

enum class Subcommand { Run, Preset, Oracle, Micro, Converge };

struct RunArgs {
  SimulationConfig config;
  std::filesystem::path out;
};

struct PresetArgs {
  std::string id;
  std::vector<ModelKind> models;
  std::vector<double> resolutions;
  std::filesystem::path out_dir = ".";
  double cfl = 0.45;
};

struct OracleArgs {
  std::string id;
  double t = 0.0;
  double dx = 0.001;
  std::filesystem::path out;
};

struct MicroArgs {
  micro::MicroConfig config;
  std::filesystem::path out;
};

struct ConvergeArgs {
  ModelKind model = ModelKind::AwRascleType;
  ModelParameters params;
  int levels = 3;
  int n0 = 100;
  double t_end = 0.1;
  double cfl = 0.45;
  double exclusion_radius = 0.05;
};

/// A fully validated invocation. Only the member matching `subcommand` is
/// meaningful.
struct CliCommand {
  Subcommand subcommand = Subcommand::Run;
  std::optional<std::filesystem::path> config_path;
  bool quiet = false;
  bool help = false;  ///< --help was given; `help_text` holds the usage
  std::string help_text;
  RunArgs run;
  PresetArgs preset;
  OracleArgs oracle;
  MicroArgs micro;
  ConvergeArgs converge;
};

/// Reads `key = value` lines (`#` starts a comment) on top of the defaults.
/// Keys: model, coefficients, boundary, rho_l, u_l, rho_r, u_r, x0, x_lo, x_hi,
/// dx, n_cells, t_end, cfl, H, H_A, H_B, v_ref, w, q_A, q_B, alpha, beta, eta,
/// c_eta, C_limit. Throws UsageError citing the line on malformed input.
SimulationConfig load_config(const std::filesystem::path& path);
SimulationConfig parse_config_text(std::string_view text, SimulationConfig base = {},
                                   std::string_view source = "<config>");

/// Parses and validates argv (without the program name). Throws UsageError.
CliCommand parse_args(const std::vector<std::string>& args);

/// Runs a parsed command. Throws on runtime failure.
void execute(const CliCommand& cmd, std::ostream& out);

/// parse_args + execute with exit-code mapping; messages go to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace traffic::cli
