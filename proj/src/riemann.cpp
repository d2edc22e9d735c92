#include "traffic/riemann.hpp"

#include <cmath>

namespace traffic::riemann {

namespace {

void check_state(Primitive s, const ModelParameters& params) {
  if (!(s.rho >= 0.0) || s.rho * params.H >= 1.0)
    throw DomainError("riemann: density outside [0, rho_max)");
  if (!std::isfinite(s.u)) throw DomainError("riemann: non-finite velocity");
}

// Density on the rarefaction fan where lambda1 = xi; lambda1 decreases in rho.
double fan_density(const WaveStructure& ws, double xi, double rho_lo, double rho_hi) {
  auto f = [&](double rho) {
    return lambda1(rho, ws.w_left - pressure(rho, ws.params), ws.params) - xi;
  };
  double lo = rho_lo;
  double hi = rho_hi;
  for (int it = 0; it < 200 && hi - lo > 1e-14; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (f(mid) > 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

double lambda1(double rho, double u, const ModelParameters& params) {
  return u - rho * pressure_derivative(rho, params);
}

WaveStructure solve_riemann(Primitive left, Primitive right, const ModelParameters& params) {
  check_state(left, params);
  check_state(right, params);
  if (left.rho == 0.0 && right.rho == 0.0)
    throw UnsupportedInput("riemann: both states are vacuum");

  WaveStructure ws;
  ws.left = left;
  ws.right = right;
  ws.params = params;
  ws.contact_speed = right.u;
  ws.w_left = left.u + pressure(left.rho, params);

  if (left.rho == 0.0) {
    // Nothing to the left: only the contact bounding the right state remains.
    ws.middle = left;
    return ws;
  }

  const bool right_vacuum = right.rho == 0.0;
  if (right_vacuum || right.u > ws.w_left) {
    ws.first_wave = WaveKind::Rarefaction;
    ws.middle = {0.0, ws.w_left};
    ws.head_speed = lambda1(left.rho, left.u, params);
    ws.tail_speed = ws.w_left;
    ws.vacuum.present = true;
    ws.vacuum.lo = ws.w_left;
    ws.vacuum.hi = right_vacuum ? std::numeric_limits<double>::infinity() : right.u;
    ws.contact_speed = ws.vacuum.hi;
    return ws;
  }

  ws.middle = {pressure_inverse(ws.w_left - right.u, params), right.u};
  if (left.u > ws.middle.u) {
    ws.first_wave = WaveKind::Shock;
    ws.shock_speed = (ws.middle.rho * ws.middle.u - left.rho * left.u) /
                     (ws.middle.rho - left.rho);
  } else if (left.u < ws.middle.u) {
    ws.first_wave = WaveKind::Rarefaction;
    ws.head_speed = lambda1(left.rho, left.u, params);
    ws.tail_speed = lambda1(ws.middle.rho, ws.middle.u, params);
  }
  return ws;
}

Primitive sample(const WaveStructure& ws, double xi) {
  if (ws.left.rho == 0.0) return xi < ws.contact_speed ? ws.left : ws.right;

  switch (ws.first_wave) {
    case WaveKind::Shock:
      if (xi < ws.shock_speed) return ws.left;
      break;
    case WaveKind::Rarefaction:
      if (xi < ws.head_speed) return ws.left;
      if (xi <= ws.tail_speed) {
        const double rho = fan_density(ws, xi, ws.middle.rho, ws.left.rho);
        return {rho, ws.w_left - pressure(rho, ws.params)};
      }
      break;
    case WaveKind::None:
      break;
  }
  if (ws.vacuum.present) {
    if (xi < ws.vacuum.hi) return {0.0, xi};
    return ws.right;
  }
  return xi < ws.contact_speed ? ws.middle : ws.right;
}

std::vector<Primitive> sample_grid(const WaveStructure& ws, double x0, double t, double x_lo,
                                   double dx, std::size_t n) {
  std::vector<Primitive> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = x_lo + (static_cast<double>(i) + 0.5) * dx;
    if (t > 0.0)
      out[i] = sample(ws, (x - x0) / t);
    else
      out[i] = x < x0 ? ws.left : ws.right;
  }
  return out;
}

}  // namespace traffic::riemann
