#pragma once

#include <array>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "traffic/closure.hpp"
#include "traffic/core.hpp"

namespace traffic::macro {

using Vec2 = std::array<double, 2>;
using Mat2 = std::array<Vec2, 2>;  // row-major

class CflViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NonFiniteState : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Three-argument MinMod: min if all positive, max if all negative, else 0.
double minmod3(double x1, double x2, double x3);

struct HamiltonianEval {
  Vec2 value{};
  Mat2 dH_dphi{};
  Mat2 dH_dphix{};
};

double max_abs_eigenvalue(const Mat2& m);

/// H(phi, phi_x) for the system phi_t + H(phi, phi_x) = 0.
///
/// Momentum models use phi = (rho, rho u) and
///   H = (rho u_x + u rho_x, (rho u^2)_x - Q),
/// with Q = rho a u_x (Aw-Rascle type), rho b |u_x| u_x (Hamilton-Jacobi) or
/// rho b min(|u_x|, C) u_x (merged). The conservative Aw-Rascle model uses
/// phi = (rho, y) and H = F'(phi) phi_x with F = (rho u, y u).
/// Vacuum points (rho < kVacuumFloor) evaluate to zero.
class Hamiltonian {
 public:
  Hamiltonian(ModelKind model, const ModelParameters& params,
              closure::CoefficientProfile profile);
  Hamiltonian(ModelKind model, const ModelParameters& params);

  ModelKind model() const { return model_; }

  Vec2 value(const Vec2& phi, const Vec2& phix) const;
  HamiltonianEval evaluate(const Vec2& phi, const Vec2& phix) const;

  /// d/dx H(phi(x), phi_x(x)) = dH/dphi phi_x + dH/dphi_x phi_xx, arranged so
  /// that states with exactly constant velocity stay exactly constant.
  Vec2 derivative_along(const Vec2& phi, const Vec2& phix, const Vec2& phixx) const;

  /// Largest |eigenvalue| of dH/dphi_x at one point.
  double wave_speed(const Vec2& phi, const Vec2& phix) const;

  /// u_x at one point (0 in vacuum).
  double velocity_gradient(const Vec2& phi, const Vec2& phix) const;

  /// |u| at one point (0 in vacuum).
  double speed(const Vec2& phi) const;

 private:
  struct Source {
    double Q, dQ_drho, dQ_du, dQ_dux;
  };
  Source source(double rho, double u, double ux) const;
  HamiltonianEval evaluate_conservative(const Vec2& phi, const Vec2& phix) const;

  ModelKind model_;
  ModelParameters params_;
  closure::CoefficientProfile profile_;
};

HamiltonianEval hamiltonian(ModelKind model, const Vec2& phi, const Vec2& phix,
                            const ModelParameters& params,
                            const closure::CoefficientProfile& profile);

/// max over points of the largest |eigenvalue| of dH/dphi_x.
double max_wave_speed(ModelKind model, std::span<const Vec2> phi, std::span<const Vec2> phix,
                      const ModelParameters& params,
                      const closure::CoefficientProfile& profile);

struct StepReport {
  double t = 0.0;  ///< time at the start of the step
  double dt = 0.0;
  double dx = 0.0;
  double max_lambda = 0.0;
  double max_du_dx = 0.0;
  double mass_before = 0.0;
  double mass_after = 0.0;
  bool gradient_limited = false;  ///< wave speed set by the |u_x| term rather than by |u|

  double courant() const { return dx > 0.0 ? dt * max_lambda / dx : 0.0; }
};

/// Staggered second-order central scheme with MinMod-limited second differences.
/// States stay on the original grid: each step evolves the midpoint values and
/// interpolates them back to the cell centres.
class CentralScheme {
 public:
  static constexpr std::size_t kGhostCells = 3;

  CentralScheme(ModelKind model, const ModelParameters& params,
                closure::CoefficientProfile profile, Boundary boundary = Boundary::Outflow);
  CentralScheme(ModelKind model, const ModelParameters& params,
                Boundary boundary = Boundary::Outflow);

  const Hamiltonian& hamiltonian() const { return hamiltonian_; }

  /// Wave speed bound at the start of a step (midpoint values and slopes).
  double max_wave_speed(const MacroState& state) const;

  /// One step with the given dt. Throws CflViolation if dt |lambda_max| / dx > cfl.
  std::pair<MacroState, StepReport> step(const MacroState& state, double dt,
                                         double cfl = 0.5) const;

  /// One step with dt = min(cfl dx / |lambda_max|, dt_max).
  std::pair<MacroState, StepReport> advance(const MacroState& state, double cfl,
                                            double dt_max) const;

 private:
  struct Midpoints {
    std::vector<Vec2> phi, phix, phixx;
    double max_lambda = 0.0;
    double max_speed = 0.0;
  };
  Midpoints midpoints(const MacroState& state) const;
  std::pair<MacroState, StepReport> step_from(const MacroState& state, Midpoints mid, double dt,
                                              double cfl) const;

  Hamiltonian hamiltonian_;
  ModelParameters params_;
  Boundary boundary_;
};

std::pair<MacroState, StepReport> central_step(const MacroState& state, double dt,
                                               ModelKind model, const ModelParameters& params,
                                               double cfl = 0.5,
                                               Boundary boundary = Boundary::Outflow);

struct RunResult {
  std::vector<MacroState> snapshots;  ///< initial state, requested output times, t_end
  std::vector<double> masses;         ///< sum(rho) dx for each snapshot
  std::vector<StepReport> steps;
  double wall_seconds = 0.0;
};

RunResult run_macro(const SimulationConfig& config);

}  // namespace traffic::macro
