#include "traffic/macro_solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

namespace traffic::macro {

namespace {

Vec2 operator+(const Vec2& a, const Vec2& b) { return {a[0] + b[0], a[1] + b[1]}; }
Vec2 operator-(const Vec2& a, const Vec2& b) { return {a[0] - b[0], a[1] - b[1]}; }
Vec2 operator*(double s, const Vec2& a) { return {s * a[0], s * a[1]}; }
Vec2 operator*(const Mat2& m, const Vec2& v) {
  return {m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]};
}

// Second difference of the first differences around d1, MinMod-limited.
Vec2 limited_second_difference(const Vec2& d0, const Vec2& d1, const Vec2& d2) {
  const Vec2 a = d2 - d1;
  const Vec2 b = 0.5 * (d2 - d0);
  const Vec2 c = d1 - d0;
  return {macro::minmod3(a[0], b[0], c[0]), macro::minmod3(a[1], b[1], c[1])};
}

}  // namespace

double minmod3(double x1, double x2, double x3) {
  if (x1 > 0.0 && x2 > 0.0 && x3 > 0.0) return std::min({x1, x2, x3});
  if (x1 < 0.0 && x2 < 0.0 && x3 < 0.0) return std::max({x1, x2, x3});
  return 0.0;
}

double max_abs_eigenvalue(const Mat2& m) {
  const double half_trace = 0.5 * (m[0][0] + m[1][1]);
  const double det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
  const double disc = half_trace * half_trace - det;
  if (disc < 0.0) return std::sqrt(std::abs(det));
  const double r = std::sqrt(disc);
  return std::max(std::abs(half_trace + r), std::abs(half_trace - r));
}

// ---------------------------------------------------------------------------
// Hamiltonian

Hamiltonian::Hamiltonian(ModelKind model, const ModelParameters& params,
                         closure::CoefficientProfile profile)
    : model_(model), params_(params), profile_(std::move(profile)) {}

Hamiltonian::Hamiltonian(ModelKind model, const ModelParameters& params)
    : Hamiltonian(model, params, closure::CoefficientProfile(params)) {}

Hamiltonian::Source Hamiltonian::source(double rho, double u, double ux) const {
  const double rc = clamp_density(rho, params_);
  const int sign = ux < 0.0 ? -1 : 1;
  switch (model_) {
    case ModelKind::AwRascleType: {
      const double a = profile_.a(rc, u, sign);
      return {rho * a * ux, (a + rho * profile_.da_drho(rc, u, sign)) * ux,
              rho * profile_.da_du(rc, u, sign) * ux, rho * a};
    }
    case ModelKind::HamiltonJacobi:
    case ModelKind::Merged: {
      const double b = profile_.b(rc, sign);
      const double abs_ux = std::abs(ux);
      double g = abs_ux * ux;
      double dg = 2.0 * abs_ux;
      if (model_ == ModelKind::Merged) {
        g = std::min(abs_ux, params_.C_limit) * ux;
        dg = abs_ux < params_.C_limit ? 2.0 * abs_ux : params_.C_limit;
      }
      return {rho * b * g, (b + rho * profile_.db_drho(rc, sign)) * g, 0.0, rho * b * dg};
    }
    case ModelKind::ConservativeAwRascle:
      break;
  }
  return {0.0, 0.0, 0.0, 0.0};
}

Vec2 Hamiltonian::value(const Vec2& phi, const Vec2& phix) const {
  if (model_ == ModelKind::ConservativeAwRascle) return evaluate_conservative(phi, phix).value;
  const double rho = phi[0];
  if (rho < kVacuumFloor) return {0.0, 0.0};
  const double m = phi[1];
  const double u = m / rho;
  const double ux = (phix[1] - u * phix[0]) / rho;
  const Source s = source(rho, u, ux);
  return {phix[1], u * phix[1] + (m * ux - s.Q)};
}

HamiltonianEval Hamiltonian::evaluate(const Vec2& phi, const Vec2& phix) const {
  if (model_ == ModelKind::ConservativeAwRascle) return evaluate_conservative(phi, phix);
  HamiltonianEval out;
  const double rho = phi[0];
  if (rho < kVacuumFloor) return out;
  const double m = phi[1];
  const double rx = phix[0];
  const double mx = phix[1];
  const double u = m / rho;
  const double ux = (mx - u * rx) / rho;
  const Source s = source(rho, u, ux);

  const double u_rho = -u / rho;
  const double u_m = 1.0 / rho;
  const double ux_rho = (u * rx / rho - ux) / rho;
  const double ux_m = -rx / (rho * rho);
  const double ux_rx = -u / rho;
  const double ux_mx = 1.0 / rho;

  out.value = {mx, u * mx + (m * ux - s.Q)};
  out.dH_dphi[0] = {0.0, 0.0};
  out.dH_dphi[1] = {u_rho * mx + m * ux_rho - (s.dQ_drho + s.dQ_du * u_rho + s.dQ_dux * ux_rho),
                    u_m * mx + ux + m * ux_m - (s.dQ_du * u_m + s.dQ_dux * ux_m)};
  out.dH_dphix[0] = {0.0, 1.0};
  out.dH_dphix[1] = {m * ux_rx - s.dQ_dux * ux_rx, u + m * ux_mx - s.dQ_dux * ux_mx};
  return out;
}

HamiltonianEval Hamiltonian::evaluate_conservative(const Vec2& phi, const Vec2& phix) const {
  HamiltonianEval out;
  const double rho = phi[0];
  if (rho < kVacuumFloor) return out;
  const double y = phi[1];
  const double rc = clamp_density(rho, params_);
  const double p = pressure(rc, params_);
  const double p1 = pressure_derivative(rc, params_);
  const double p2 = pressure_second_derivative(rc, params_);
  const double u = y / rho - p;
  const double u_rho = -y / (rho * rho) - p1;

  // F'(phi) for F = (rho u, y u)
  const Mat2 A{{{-p - rho * p1, 1.0}, {y * u_rho, u + y / rho}}};
  const double A11_rho = -2.0 * p1 - rho * p2;
  const double A21_rho = y * (2.0 * y / (rho * rho * rho) - p2);
  const double A21_y = u_rho - y / (rho * rho);
  const double A22_rho = A21_y;
  const double A22_y = 2.0 / rho;

  out.value = A * phix;
  out.dH_dphix = A;
  out.dH_dphi[0] = {A11_rho * phix[0], 0.0};
  out.dH_dphi[1] = {A21_rho * phix[0] + A22_rho * phix[1], A21_y * phix[0] + A22_y * phix[1]};
  return out;
}

Vec2 Hamiltonian::derivative_along(const Vec2& phi, const Vec2& phix, const Vec2& phixx) const {
  if (model_ == ModelKind::ConservativeAwRascle) {
    const HamiltonianEval e = evaluate_conservative(phi, phix);
    return e.dH_dphi * phix + e.dH_dphix * phixx;
  }
  const double rho = phi[0];
  if (rho < kVacuumFloor) return {0.0, 0.0};
  const double m = phi[1];
  const double rx = phix[0];
  const double mx = phix[1];
  const double u = m / rho;
  const double ux = (mx - u * rx) / rho;
  const double uxx = (phixx[1] - u * phixx[0] - 2.0 * ux * rx) / rho;
  const Source s = source(rho, u, ux);
  return {phixx[1],
          ux * mx + u * phixx[1] + mx * ux + m * uxx -
              (s.dQ_drho * rx + s.dQ_du * ux + s.dQ_dux * uxx)};
}

double Hamiltonian::wave_speed(const Vec2& phi, const Vec2& phix) const {
  if (phi[0] < kVacuumFloor) return 0.0;
  return max_abs_eigenvalue(evaluate(phi, phix).dH_dphix);
}

double Hamiltonian::velocity_gradient(const Vec2& phi, const Vec2& phix) const {
  const double rho = phi[0];
  if (rho < kVacuumFloor) return 0.0;
  if (model_ == ModelKind::ConservativeAwRascle) {
    const double rc = clamp_density(rho, params_);
    return phix[1] / rho - (phi[1] / (rho * rho) + pressure_derivative(rc, params_)) * phix[0];
  }
  return (phix[1] - phi[1] / rho * phix[0]) / rho;
}

double Hamiltonian::speed(const Vec2& phi) const {
  return std::abs(velocity_from_fields(phi[0], phi[1], required_variable_set(model_), params_));
}

HamiltonianEval hamiltonian(ModelKind model, const Vec2& phi, const Vec2& phix,
                            const ModelParameters& params,
                            const closure::CoefficientProfile& profile) {
  return Hamiltonian(model, params, profile).evaluate(phi, phix);
}

double max_wave_speed(ModelKind model, std::span<const Vec2> phi, std::span<const Vec2> phix,
                      const ModelParameters& params,
                      const closure::CoefficientProfile& profile) {
  const Hamiltonian h(model, params, profile);
  double lambda = 0.0;
  for (std::size_t i = 0; i < phi.size(); ++i)
    lambda = std::max(lambda, h.wave_speed(phi[i], phix[i]));
  return lambda;
}

// ---------------------------------------------------------------------------
// CentralScheme

CentralScheme::CentralScheme(ModelKind model, const ModelParameters& params,
                             closure::CoefficientProfile profile, Boundary boundary)
    : hamiltonian_(model, params, std::move(profile)), params_(params), boundary_(boundary) {}

CentralScheme::CentralScheme(ModelKind model, const ModelParameters& params, Boundary boundary)
    : CentralScheme(model, params, closure::CoefficientProfile(params), boundary) {}

CentralScheme::Midpoints CentralScheme::midpoints(const MacroState& state) const {
  constexpr std::size_t G = kGhostCells;
  const std::size_t n = state.size();
  if (n < 5) throw ConfigError("central scheme needs at least 5 cells");
  if (state.variable_set != required_variable_set(hamiltonian_.model()))
    throw ConfigError("state variable set does not match the model");

  std::vector<Vec2> e(n + 2 * G);
  for (std::size_t k = 0; k < e.size(); ++k) {
    std::size_t i;
    if (boundary_ == Boundary::Periodic) {
      i = (k + n * G - G) % n;
    } else {
      i = k < G ? 0 : std::min(k - G, n - 1);
    }
    e[k] = {state.rho[i], state.m[i]};
  }
  std::vector<Vec2> d(e.size() - 1);
  for (std::size_t k = 0; k + 1 < e.size(); ++k) d[k] = e[k + 1] - e[k];

  // Midpoints k + 1/2 for k = G-2 .. G+n: every point the recentering of the
  // n interior cells touches.
  const double dx = state.dx;
  Midpoints mid;
  mid.phi.resize(n + 3);
  mid.phix.resize(n + 3);
  mid.phixx.resize(n + 3);
  for (std::size_t j = 0; j < n + 3; ++j) {
    const std::size_t k = j + G - 2;
    const Vec2 D = limited_second_difference(d[k - 1], d[k], d[k + 1]);
    mid.phi[j] = e[k] + 0.5 * d[k] - 0.125 * D;
    mid.phix[j] = (1.0 / dx) * d[k];
    mid.phixx[j] = (1.0 / (dx * dx)) * D;
    mid.max_lambda = std::max(mid.max_lambda, hamiltonian_.wave_speed(mid.phi[j], mid.phix[j]));
    mid.max_speed = std::max(mid.max_speed, hamiltonian_.speed(mid.phi[j]));
  }
  return mid;
}

double CentralScheme::max_wave_speed(const MacroState& state) const {
  return midpoints(state).max_lambda;
}

std::pair<MacroState, StepReport> CentralScheme::step_from(const MacroState& state,
                                                           Midpoints mid, double dt,
                                                           double cfl) const {
  const double dx = state.dx;
  const std::size_t n = state.size();
  StepReport report;
  report.t = state.t;
  report.dt = dt;
  report.dx = dx;
  report.max_lambda = mid.max_lambda;
  report.mass_before = state.mass();
  report.gradient_limited = hamiltonian_.model() != ModelKind::AwRascleType &&
                            hamiltonian_.model() != ModelKind::ConservativeAwRascle &&
                            mid.max_lambda > mid.max_speed * (1.0 + 1e-12);
  if (!(dt > 0.0)) throw ConfigError("time step must be positive");
  if (report.courant() > cfl * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "CFL violation: dt |lambda_max| / dx = " << report.courant() << " > " << cfl;
    throw CflViolation(os.str());
  }

  // Midpoint rule in time, with a first-order Taylor predictor for the slopes.
  std::vector<Vec2> next(n + 3);
  for (std::size_t j = 0; j < n + 3; ++j) {
    const Vec2& phi = mid.phi[j];
    const Vec2& phix = mid.phix[j];
    const Vec2 phi_half = phi - (0.5 * dt) * hamiltonian_.value(phi, phix);
    const Vec2 phix_half =
        phix - (0.5 * dt) * hamiltonian_.derivative_along(phi, phix, mid.phixx[j]);
    next[j] = phi - dt * hamiltonian_.value(phi_half, phix_half);
    report.max_du_dx = std::max({report.max_du_dx,
                                 std::abs(hamiltonian_.velocity_gradient(phi, phix)),
                                 std::abs(hamiltonian_.velocity_gradient(phi_half, phix_half))});
  }

  MacroState out = state;
  out.t = state.t + dt;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 d0 = next[i + 1] - next[i];
    const Vec2 d1 = next[i + 2] - next[i + 1];
    const Vec2 d2 = next[i + 3] - next[i + 2];
    const Vec2 v = next[i + 1] + 0.5 * d1 - 0.125 * limited_second_difference(d0, d1, d2);
    if (!std::isfinite(v[0]) || !std::isfinite(v[1])) {
      std::ostringstream os;
      os << "non-finite state in cell " << i << " at t = " << out.t;
      throw NonFiniteState(os.str());
    }
    out.rho[i] = v[0];
    out.m[i] = v[1];
  }
  report.mass_after = out.mass();
  return {std::move(out), report};
}

std::pair<MacroState, StepReport> CentralScheme::step(const MacroState& state, double dt,
                                                      double cfl) const {
  return step_from(state, midpoints(state), dt, cfl);
}

std::pair<MacroState, StepReport> CentralScheme::advance(const MacroState& state, double cfl,
                                                         double dt_max) const {
  Midpoints mid = midpoints(state);
  double dt = dt_max;
  if (mid.max_lambda > 0.0) dt = std::min(dt, cfl * state.dx / mid.max_lambda);
  return step_from(state, std::move(mid), dt, cfl);
}

std::pair<MacroState, StepReport> central_step(const MacroState& state, double dt,
                                               ModelKind model, const ModelParameters& params,
                                               double cfl, Boundary boundary) {
  return CentralScheme(model, params, boundary).step(state, dt, cfl);
}

RunResult run_macro(const SimulationConfig& config) {
  validate(config);
  const auto start = std::chrono::steady_clock::now();
  const CentralScheme scheme(config.model, config.params,
                             closure::CoefficientProfile(config.params, config.coefficients),
                             config.boundary);

  std::vector<double> targets = config.output_times;
  targets.push_back(config.t_end);
  std::sort(targets.begin(), targets.end());
  targets.erase(std::unique(targets.begin(), targets.end()), targets.end());

  RunResult result;
  MacroState state = initial_state(config);
  result.snapshots.push_back(state);
  result.masses.push_back(state.mass());

  for (double target : targets) {
    while (state.t < target) {
      auto [next, report] = scheme.advance(state, config.cfl_number, target - state.t);
      if (report.dt >= target - state.t) next.t = target;
      state = std::move(next);
      result.steps.push_back(report);
    }
    if (target > 0.0) {
      result.snapshots.push_back(state);
      result.masses.push_back(state.mass());
    }
  }
  if (config.t_end == 0.0) {
    result.snapshots.push_back(state);
    result.masses.push_back(state.mass());
  }
  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

}  // namespace traffic::macro
