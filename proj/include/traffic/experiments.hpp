#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "traffic/core.hpp"
#include "traffic/macro_solver.hpp"

namespace traffic::experiments {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One of the four Riemann test cases on [0, 1] (ids ex1 .. ex4).
struct ExperimentPreset {
  std::string id;
  RiemannData data;
  double t_end = 0.0;
  double x_lo = 0.0;
  double x_hi = 1.0;
  std::vector<double> resolutions{0.01, 0.001};
  std::vector<ModelKind> models;
};

ExperimentPreset preset(std::string_view id);
std::vector<std::string> preset_ids();

/// Outflow run of one model on one resolution, normalized units.
SimulationConfig make_config(const ExperimentPreset& p, ModelKind model, double dx,
                             double cfl = 0.45, const ModelParameters& params = {});

struct RunRecord {
  ModelKind model = ModelKind::AwRascleType;
  double dx = 0.0;
  double x_lo = 0.0;
  double t = 0.0;
  std::vector<Primitive> cells;  ///< at t_end
  std::vector<macro::StepReport> steps;
  double wall_seconds = 0.0;
  bool ok = false;
  std::string error;

  std::string label() const;
};

struct OracleRecord {
  double dx = 0.0;
  double x_lo = 0.0;
  std::vector<Primitive> cells;

  std::string label() const;
};

struct PairDistance {
  std::string a;
  std::string b;
  double l1 = 0.0;  ///< on rho, over the coarser of the two grids
  double linf = 0.0;
};

struct ComparisonReport {
  std::string preset_id;
  double t_end = 0.0;
  std::vector<RunRecord> runs;
  std::vector<OracleRecord> oracles;
  std::vector<PairDistance> distances;
  std::vector<std::filesystem::path> csv_paths;
  bool partial = false;  ///< some run failed; its record carries the error

  const RunRecord* find(ModelKind model, double dx) const;
  const OracleRecord* oracle(double dx) const;
};

/// Runs every (model, dx) pair, samples the exact Aw-Rascle solution on each
/// grid, and computes pairwise rho distances at t_end. With `out_dir` set,
/// writes `<preset>_<model>_<dx>.csv` per run and `<preset>_oracle_<dx>.csv`.
ComparisonReport run_comparison(const ExperimentPreset& p, const std::vector<ModelKind>& models,
                                const std::vector<double>& resolutions,
                                const std::optional<std::filesystem::path>& out_dir = {},
                                double cfl = 0.45);

struct ConvergenceSetup {
  ModelKind model = ModelKind::AwRascleType;
  ModelParameters params;
  std::function<Primitive(double)> profile;  ///< periodic on [0, 1]; default sine data
  int levels = 3;
  int n0 = 100;
  double t_end = 0.1;
  double cfl = 0.45;
  /// Cells within this distance of a local extremum of rho or u are left out
  /// of the extremum-excluded norm.
  double exclusion_radius = 0.05;
};

struct ConvergenceResult {
  std::vector<int> n_cells;
  std::vector<double> errors;           ///< L1(rho) between consecutive levels
  std::vector<double> errors_excluded;  ///< same, extremum-excluded
  std::vector<double> orders;
  std::vector<double> orders_excluded;
  double mean_order = 0.0;
  double mean_order_excluded = 0.0;
};

/// Default smooth data: rho = 0.5 + 0.2 sin(2 pi x), u = 0.5 + 0.1 sin(2 pi x).
Primitive sine_profile(double x);

ConvergenceResult convergence_study(const ConvergenceSetup& setup);

// --- metrics -----------------------------------------------------------------

double l1_distance(const std::vector<Primitive>& a, const std::vector<Primitive>& b, double dx);
double linf_distance(const std::vector<Primitive>& a, const std::vector<Primitive>& b);

/// Linear interpolation of cell-centre data onto another uniform grid.
std::vector<Primitive> resample(const std::vector<Primitive>& cells, double x_lo, double dx,
                                double to_x_lo, double to_dx, std::size_t to_n);

/// Interface x_lo + (i+1) dx between the two cells with the largest |rho jump|.
double steepest_gradient_position(const std::vector<Primitive>& cells, double x_lo, double dx);

// --- CSV -----------------------------------------------------------------------

struct CsvRow {
  double x = 0.0;
  double rho = 0.0;
  double u = 0.0;
  std::string model;
  double dx = 0.0;
  double t = 0.0;
};

std::vector<CsvRow> csv_rows(std::string_view model, double dx, double t, double x_lo,
                             const std::vector<Primitive>& cells);

/// Header `x,rho,u,model,dx,t`, one row per cell, 17 significant digits.
void write_csv(const std::filesystem::path& path, const std::vector<CsvRow>& rows);
std::vector<CsvRow> read_csv(const std::filesystem::path& path);

/// Shortest decimal form, used in file names (0.01, 0.001).
std::string format_dx(double dx);

}  // namespace traffic::experiments
