#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace traffic {

/// Densities below this value are treated as vacuum (velocity reported as 0,
/// no momentum source evaluated).
inline constexpr double kVacuumFloor = 1e-10;

/// Gap kept below the maximal density before any coefficient evaluation.
inline constexpr double kCeilingGap = 1e-10;

/// Physical and kinetic constants. Defaults are the normalized units H = 1,
/// v_ref = 1 (maximal density 1).
struct ModelParameters {
  double H = 1.0;      ///< minimal headway / vehicle length
  double H_A = 1.0;    ///< acceleration threshold
  double H_B = 1.0;    ///< braking threshold
  double v_ref = 1.0;  ///< reference velocity
  double w = 1.0;      ///< maximal velocity
  double q_A = 1.0;
  double q_B = 1.0;
  double alpha = 2.0;  ///< upper acceleration factor of the second Boltzmann interaction law
  double beta = 0.5;   ///< lower braking factor of the second Boltzmann interaction law
  int eta = 1;         ///< Fokker-Planck force exponent, 1 or 2
  double c_eta = 1.0;
  double C_limit = 5.0;  ///< cap on |u_x| in the merged model

  double rho_max() const { return 1.0 / H; }
};

enum class ParameterViolation {
  NonPositiveH,
  NonPositiveBrakingThreshold,
  ThresholdOrder,
  NonPositiveReferenceVelocity,
  NonPositiveMaxVelocity,
  NegativeAccelerationWeight,
  NegativeBrakingWeight,
  BetaOutOfRange,
  AlphaNotAboveOne,
  NonPositiveCLimit,
  InvalidEta,
  NonPositiveForceScale,
};

class ParameterError : public std::invalid_argument {
 public:
  ParameterError(ParameterViolation violation, const std::string& what)
      : std::invalid_argument(what), violation_(violation) {}
  ParameterViolation violation() const noexcept { return violation_; }

 private:
  ParameterViolation violation_;
};

/// Thrown when a closure or pressure formula is evaluated outside its domain.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Invalid simulation setup (grid, CFL number, initial data).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

void validate(const ModelParameters& params);

/// Clamp to [0, rho_max - kCeilingGap].
double clamp_density(double rho, const ModelParameters& params);

enum class VariableSet { Momentum, ConservativeY };

enum class ModelKind { AwRascleType, HamiltonJacobi, Merged, ConservativeAwRascle };

enum class CoefficientForm { Simplified, General };

enum class Boundary { Outflow, Periodic };

VariableSet required_variable_set(ModelKind model);

/// Short names used on the command line and in file names: ar, hj, merged, ar-cons.
std::string_view model_name(ModelKind model);
ModelKind parse_model_kind(std::string_view name);

struct Primitive {
  double rho = 0.0;
  double u = 0.0;
};

/// Point values of (rho, m) at the cell centres of a uniform grid. The second
/// field m is rho*u in momentum mode and y = rho*(u + p(rho)) in conservative mode.
struct MacroState {
  double x0 = 0.0;  ///< left domain edge
  double dx = 0.0;
  std::vector<double> rho;
  std::vector<double> m;
  VariableSet variable_set = VariableSet::Momentum;
  double t = 0.0;

  std::size_t size() const { return rho.size(); }
  double x(std::size_t i) const { return x0 + (static_cast<double>(i) + 0.5) * dx; }
  double mass() const;
};

/// Checks field lengths, finiteness and the density range.
void validate(const MacroState& state, const ModelParameters& params);

/// Traffic pressure p(rho) = -v_ref ln(1 - rho H).
double pressure(double rho, const ModelParameters& params);
double pressure_derivative(double rho, const ModelParameters& params);
double pressure_second_derivative(double rho, const ModelParameters& params);
/// Clamped to rho_max - kCeilingGap, so the result is always an admissible density.
double pressure_inverse(double p_val, const ModelParameters& params);

double velocity_from_fields(double rho, double m, VariableSet set, const ModelParameters& params);
double second_field(Primitive prim, VariableSet set, const ModelParameters& params);

std::vector<Primitive> to_primitive(const MacroState& state, const ModelParameters& params);
MacroState from_primitive(double x0, double dx, std::span<const Primitive> cells, VariableSet set,
                          const ModelParameters& params, double t = 0.0);

struct RiemannData {
  Primitive left;
  Primitive right;
  double x0 = 0.5;
};

struct SmoothData {
  std::function<Primitive(double)> profile;
};

using InitialCondition = std::variant<RiemannData, SmoothData>;

struct SimulationConfig {
  ModelKind model = ModelKind::AwRascleType;
  ModelParameters params;
  CoefficientForm coefficients = CoefficientForm::Simplified;
  double x_lo = 0.0;
  double x_hi = 1.0;
  int n_cells = 100;
  double t_end = 0.0;
  double cfl_number = 0.45;
  Boundary boundary = Boundary::Outflow;
  InitialCondition initial_condition = RiemannData{};
  /// Extra snapshot times in (0, t_end); t_end is always recorded.
  std::vector<double> output_times;

  double dx() const { return (x_hi - x_lo) / n_cells; }
};

void validate(const SimulationConfig& config);

MacroState initial_state(const SimulationConfig& config);

}  // namespace traffic
