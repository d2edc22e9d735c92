#include "traffic/micro.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace traffic::micro {

namespace {

constexpr int kMaxHalvings = 20;

double gap_or_throw(const MicroState& s, std::size_t i) {
  const double l = s.x[i + 1] - s.x[i];
  if (!(l > s.H)) {
    std::ostringstream os;
    os << "collision: gap " << l << " between cars " << i << " and " << i + 1
       << " not above H = " << s.H;
    throw CollisionError(os.str());
  }
  return l;
}

MicroState axpy(const MicroState& s, double h, const std::vector<double>& dx,
                const std::vector<double>& dv) {
  MicroState out = s;
  for (std::size_t i = 0; i < s.size(); ++i) {
    out.x[i] += h * dx[i];
    out.v[i] += h * dv[i];
  }
  return out;
}

MicroState rk4_attempt(const MicroState& s, double dt, FollowModel model,
                       const ModelParameters& params, int depth) {
  try {
    const auto& v1 = s.v;
    const auto a1 = micro_rhs(model, s, params);
    const MicroState s2 = axpy(s, 0.5 * dt, v1, a1);
    const auto a2 = micro_rhs(model, s2, params);
    const MicroState s3 = axpy(s, 0.5 * dt, s2.v, a2);
    const auto a3 = micro_rhs(model, s3, params);
    const MicroState s4 = axpy(s, dt, s3.v, a3);
    const auto a4 = micro_rhs(model, s4, params);

    MicroState out = s;
    out.t = s.t + dt;
    for (std::size_t i = 0; i < s.size(); ++i) {
      out.x[i] += dt / 6.0 * (v1[i] + 2.0 * s2.v[i] + 2.0 * s3.v[i] + s4.v[i]);
      out.v[i] += dt / 6.0 * (a1[i] + 2.0 * a2[i] + 2.0 * a3[i] + a4[i]);
      out.v[i] = std::clamp(out.v[i], 0.0, params.w);
    }
    for (std::size_t i = 0; i + 1 < out.size(); ++i) gap_or_throw(out, i);
    return out;
  } catch (const CollisionError& e) {
    if (depth >= kMaxHalvings)
      throw StepFailure(std::string("rk4_step: no admissible step after 20 halvings: ") +
                        e.what());
    const MicroState half = rk4_attempt(s, 0.5 * dt, model, params, depth + 1);
    return rk4_attempt(half, 0.5 * dt, model, params, depth + 1);
  }
}

}  // namespace

std::vector<double> micro_rhs(FollowModel model, const MicroState& s,
                              const ModelParameters& params) {
  const std::size_t n = s.size();
  std::vector<double> acc(n, 0.0);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double l = gap_or_throw(s, i);
    const double dv = s.v[i + 1] - s.v[i];
    if (model == FollowModel::RascleFollow)
      acc[i] = s.H * params.v_ref / l * dv / (l - s.H);
    else
      acc[i] = s.H / (l * l) * std::abs(dv) * dv / (l - s.H);
  }
  return acc;
}

double stiffness(FollowModel model, const MicroState& s, const ModelParameters& params) {
  double k = 0.0;
  for (std::size_t i = 0; i + 1 < s.size(); ++i) {
    const double l = gap_or_throw(s, i);
    if (model == FollowModel::RascleFollow) {
      k = std::max(k, s.H * params.v_ref / (l * (l - s.H)));
    } else {
      const double dv = std::abs(s.v[i + 1] - s.v[i]);
      k = std::max(k, 2.0 * s.H * dv / (l * l * (l - s.H)));
    }
  }
  return k;
}

MicroState rk4_step(const MicroState& state, double dt, FollowModel model,
                    const ModelParameters& params) {
  if (!(dt > 0.0)) throw ConfigError("rk4_step: dt must be positive");
  return rk4_attempt(state, dt, model, params, 0);
}

std::vector<Primitive> density_reconstruct(const MicroState& s, double x_lo, double dx,
                                           std::size_t n) {
  std::vector<Primitive> out(n);
  if (s.size() < 2) return out;
  for (std::size_t j = 0; j < n; ++j) {
    const double xc = x_lo + (static_cast<double>(j) + 0.5) * dx;
    if (xc < s.x.front() || xc >= s.x.back()) continue;
    const auto it = std::upper_bound(s.x.begin(), s.x.end(), xc);
    const auto i = static_cast<std::size_t>(it - s.x.begin()) - 1;
    out[j] = {s.H / (s.x[i + 1] - s.x[i]), s.v[i]};
  }
  return out;
}

MicroState place_platoon(const RiemannData& data, double x_lo, double x_hi, std::size_t n) {
  if (n < 2) throw ConfigError("place_platoon: need at least two cars");
  if (!(x_lo < data.x0 && data.x0 < x_hi))
    throw ConfigError("place_platoon: discontinuity must lie inside the platoon extent");
  const double mass_left = data.left.rho * (data.x0 - x_lo);
  const double mass_right = data.right.rho * (x_hi - data.x0);
  const double total = mass_left + mass_right;
  if (!(total > 0.0)) throw ConfigError("place_platoon: empty road");

  MicroState s;
  s.H = total / static_cast<double>(n);
  s.x.resize(n);
  s.v.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double m = (static_cast<double>(i) + 0.5) * s.H;
    if (m < mass_left) {
      s.x[i] = x_lo + m / data.left.rho;
      s.v[i] = data.left.u;
    } else {
      s.x[i] = data.x0 + (m - mass_left) / data.right.rho;
      s.v[i] = data.right.u;
    }
  }
  return s;
}

MicroRunResult run_micro(const MicroConfig& c) {
  validate(c.params);
  if (!(c.t_end >= 0.0)) throw ConfigError("run_micro: t_end must be >= 0");
  if (!(c.max_dt > 0.0)) throw ConfigError("run_micro: max_dt must be positive");
  if (c.grid_cells == 0 || !(c.grid_lo < c.grid_hi)) throw ConfigError("run_micro: bad grid");

  MicroRunResult result;
  result.grid_lo = c.grid_lo;
  result.dx = (c.grid_hi - c.grid_lo) / static_cast<double>(c.grid_cells);

  MicroState state = place_platoon(c.initial, c.platoon_lo, c.platoon_hi, c.n_cars);
  auto record = [&] {
    result.snapshots.push_back(state);
    result.fields.push_back(density_reconstruct(state, c.grid_lo, result.dx, c.grid_cells));
  };
  record();

  std::vector<double> targets = c.output_times;
  targets.push_back(c.t_end);
  std::sort(targets.begin(), targets.end());
  targets.erase(std::unique(targets.begin(), targets.end()), targets.end());
  for (double target : targets) {
    while (state.t < target) {
      double dt = std::min(c.max_dt, target - state.t);
      const double k = stiffness(c.model, state, c.params);
      if (k > 0.0) dt = std::min(dt, c.stiffness_factor / k);
      const bool last = dt >= target - state.t;
      state = rk4_step(state, dt, c.model, c.params);
      if (last) state.t = target;
      ++result.steps;
    }
    if (target > 0.0 || c.t_end == 0.0) record();
  }
  return result;
}

}  // namespace traffic::micro
