#include "traffic/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <utility>

namespace traffic {

namespace {

void require(bool ok, ParameterViolation violation, const char* what) {
  if (!ok) throw ParameterError(violation, what);
}

}  // namespace

void validate(const ModelParameters& p) {
  require(p.H > 0.0, ParameterViolation::NonPositiveH, "H must be positive");
  require(p.H_B > 0.0, ParameterViolation::NonPositiveBrakingThreshold, "H_B must be positive");
  require(p.H_A >= p.H_B, ParameterViolation::ThresholdOrder, "H_A must not be below H_B");
  require(p.v_ref > 0.0, ParameterViolation::NonPositiveReferenceVelocity,
          "v_ref must be positive");
  require(p.w > 0.0, ParameterViolation::NonPositiveMaxVelocity, "w must be positive");
  require(p.q_A >= 0.0, ParameterViolation::NegativeAccelerationWeight,
          "q_A must be non-negative");
  require(p.q_B >= 0.0, ParameterViolation::NegativeBrakingWeight, "q_B must be non-negative");
  require(p.beta > 0.0 && p.beta < 1.0, ParameterViolation::BetaOutOfRange,
          "beta must lie in (0, 1)");
  require(p.alpha > 1.0, ParameterViolation::AlphaNotAboveOne, "alpha must exceed 1");
  require(p.C_limit > 0.0, ParameterViolation::NonPositiveCLimit, "C_limit must be positive");
  require(p.eta == 1 || p.eta == 2, ParameterViolation::InvalidEta, "eta must be 1 or 2");
  require(p.c_eta > 0.0, ParameterViolation::NonPositiveForceScale, "c_eta must be positive");
}

double clamp_density(double rho, const ModelParameters& params) {
  return std::clamp(rho, 0.0, params.rho_max() - kCeilingGap);
}

VariableSet required_variable_set(ModelKind model) {
  return model == ModelKind::ConservativeAwRascle ? VariableSet::ConservativeY
                                                   : VariableSet::Momentum;
}

std::string_view model_name(ModelKind model) {
  switch (model) {
    case ModelKind::AwRascleType: return "ar";
    case ModelKind::HamiltonJacobi: return "hj";
    case ModelKind::Merged: return "merged";
    case ModelKind::ConservativeAwRascle: return "ar-cons";
  }
  return "?";
}

ModelKind parse_model_kind(std::string_view name) {
  if (name == "ar") return ModelKind::AwRascleType;
  if (name == "hj") return ModelKind::HamiltonJacobi;
  if (name == "merged") return ModelKind::Merged;
  if (name == "ar-cons") return ModelKind::ConservativeAwRascle;
  throw ConfigError("unknown model '" + std::string(name) + "' (expected ar|hj|merged|ar-cons)");
}

double MacroState::mass() const {
  return std::accumulate(rho.begin(), rho.end(), 0.0) * dx;
}

void validate(const MacroState& state, const ModelParameters& params) {
  if (state.rho.size() != state.m.size())
    throw ConfigError("rho and m fields differ in length");
  if (state.rho.size() < 5) throw ConfigError("state needs at least 5 cells");
  if (!(state.dx > 0.0)) throw ConfigError("cell width must be positive");
  for (std::size_t i = 0; i < state.size(); ++i) {
    if (!std::isfinite(state.rho[i]) || !std::isfinite(state.m[i])) {
      std::ostringstream os;
      os << "non-finite field value in cell " << i;
      throw ConfigError(os.str());
    }
    if (state.rho[i] < 0.0 || state.rho[i] * params.H >= 1.0) {
      std::ostringstream os;
      os << "density " << state.rho[i] << " in cell " << i << " outside [0, rho_max)";
      throw ConfigError(os.str());
    }
  }
}

double pressure(double rho, const ModelParameters& params) {
  const double s = rho * params.H;
  if (!(s >= 0.0) || s >= 1.0) throw DomainError("pressure: density outside [0, rho_max)");
  return -params.v_ref * std::log1p(-s);
}

double pressure_derivative(double rho, const ModelParameters& params) {
  return params.v_ref * params.H / (1.0 - rho * params.H);
}

double pressure_second_derivative(double rho, const ModelParameters& params) {
  const double g = 1.0 - rho * params.H;
  return params.v_ref * params.H * params.H / (g * g);
}

double pressure_inverse(double p_val, const ModelParameters& params) {
  if (!(p_val >= 0.0)) throw DomainError("pressure_inverse: negative pressure");
  return clamp_density(-std::expm1(-p_val / params.v_ref) / params.H, params);
}

double velocity_from_fields(double rho, double m, VariableSet set, const ModelParameters& params) {
  if (rho < kVacuumFloor) return 0.0;
  if (set == VariableSet::Momentum) return m / rho;
  return m / rho - pressure(clamp_density(rho, params), params);
}

double second_field(Primitive prim, VariableSet set, const ModelParameters& params) {
  if (set == VariableSet::Momentum) return prim.rho * prim.u;
  return prim.rho * (prim.u + pressure(prim.rho, params));
}

std::vector<Primitive> to_primitive(const MacroState& state, const ModelParameters& params) {
  std::vector<Primitive> out(state.size());
  for (std::size_t i = 0; i < state.size(); ++i)
    out[i] = {state.rho[i], velocity_from_fields(state.rho[i], state.m[i], state.variable_set, params)};
  return out;
}

MacroState from_primitive(double x0, double dx, std::span<const Primitive> cells, VariableSet set,
                          const ModelParameters& params, double t) {
  MacroState s;
  s.x0 = x0;
  s.dx = dx;
  s.variable_set = set;
  s.t = t;
  s.rho.reserve(cells.size());
  s.m.reserve(cells.size());
  for (const auto& c : cells) {
    s.rho.push_back(c.rho);
    s.m.push_back(second_field(c, set, params));
  }
  return s;
}

void validate(const SimulationConfig& c) {
  validate(c.params);
  if (!(c.x_lo < c.x_hi)) throw ConfigError("domain requires x_lo < x_hi");
  if (c.n_cells < 10) throw ConfigError("n_cells must be at least 10");
  if (!(c.cfl_number > 0.0 && c.cfl_number <= 0.5))
    throw ConfigError("cfl_number must lie in (0, 0.5]");
  if (!(c.t_end >= 0.0) || !std::isfinite(c.t_end)) throw ConfigError("t_end must be >= 0");
  for (double t : c.output_times)
    if (!(t >= 0.0 && t <= c.t_end)) throw ConfigError("output time outside [0, t_end]");
  if (const auto* r = std::get_if<RiemannData>(&c.initial_condition)) {
    if (!(c.x_lo < r->x0 && r->x0 < c.x_hi))
      throw ConfigError("Riemann discontinuity must lie strictly inside the domain");
    for (const auto& [side, s] : {std::pair{"rho_l", r->left}, std::pair{"rho_r", r->right}}) {
      if (!(s.rho >= 0.0) || s.rho * c.params.H >= 1.0) {
        std::ostringstream os;
        os << side << " = " << s.rho << " violates 0 <= rho < rho_max = " << c.params.rho_max();
        throw ConfigError(os.str());
      }
      if (!std::isfinite(s.u)) throw ConfigError("Riemann velocity must be finite");
    }
  } else if (!std::get<SmoothData>(c.initial_condition).profile) {
    throw ConfigError("smooth initial condition has no profile");
  }
}

MacroState initial_state(const SimulationConfig& c) {
  const double dx = c.dx();
  std::vector<Primitive> cells(static_cast<std::size_t>(c.n_cells));
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const double x = c.x_lo + (static_cast<double>(i) + 0.5) * dx;
    if (const auto* r = std::get_if<RiemannData>(&c.initial_condition))
      cells[i] = x < r->x0 ? r->left : r->right;
    else
      cells[i] = std::get<SmoothData>(c.initial_condition).profile(x);
  }
  return from_primitive(c.x_lo, dx, cells, required_variable_set(c.model), c.params);
}

}  // namespace traffic
