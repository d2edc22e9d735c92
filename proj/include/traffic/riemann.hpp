#pragma once

#include <limits>
#include <stdexcept>
#include <vector>

#include "traffic/core.hpp"

/**
 * Exact self-similar Riemann solution of the Aw-Rascle type system
 *
 *   rho_t + (rho u)_x = 0,   (u + p(rho))_t + u (u + p(rho))_x = 0,
 *
 * with p(rho) = -v_ref ln(1 - rho H). The solution consists of a first-family
 * shock or rarefaction connecting the left state to an intermediate state
 * (w = u + p conserved), followed by a contact discontinuity travelling with
 * the right velocity. If the right state escapes faster than the left
 * rarefaction can follow (u_r > u_l + p(rho_l)), a vacuum opens between them.
 */
namespace traffic::riemann {

class UnsupportedInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class WaveKind { None, Shock, Rarefaction };

struct VacuumInterval {
  bool present = false;
  double lo = 0.0;  ///< in x/t
  double hi = 0.0;
};

struct WaveStructure {
  Primitive left;
  Primitive right;
  WaveKind first_wave = WaveKind::None;
  double shock_speed = 0.0;
  double head_speed = 0.0;  ///< rarefaction: left edge of the fan
  double tail_speed = 0.0;  ///< rarefaction: right edge of the fan
  Primitive middle;
  VacuumInterval vacuum;
  double contact_speed = 0.0;
  double w_left = 0.0;  ///< u_l + p(rho_l)
  ModelParameters params;
};

/// First characteristic speed u - rho p'(rho).
double lambda1(double rho, double u, const ModelParameters& params);

WaveStructure solve_riemann(Primitive left, Primitive right, const ModelParameters& params);

/// Solution at similarity coordinate xi = x/t. Inside a vacuum the reported
/// velocity is xi.
Primitive sample(const WaveStructure& ws, double xi);

/// Samples at the cell centres of a uniform grid at time t for a
/// discontinuity initially at x0. For t == 0 returns the initial data.
std::vector<Primitive> sample_grid(const WaveStructure& ws, double x0, double t, double x_lo,
                                   double dx, std::size_t n);

}  // namespace traffic::riemann
