#pragma once

#include <stdexcept>
#include <vector>

#include "traffic/core.hpp"

// Car-following models associated with the macroscopic systems. Cars are
// indexed from the back (0) to the front (N-1); l_i = x_{i+1} - x_i.
namespace traffic::micro {

class CollisionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class StepFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class FollowModel {
  RascleFollow,  ///< dv_i/dt = H v_ref / l_i * (v_{i+1} - v_i) / (l_i - H)
  HJFollow,      ///< dv_i/dt = H / l_i^2 * |v_{i+1} - v_i| (v_{i+1} - v_i) / (l_i - H)
};

/// The front car has no leader and keeps its velocity.
enum class LeaderPolicy { ConstantVelocity };

struct MicroState {
  std::vector<double> x;
  std::vector<double> v;
  double H = 1.0;  ///< vehicle length (minimal headway)
  double t = 0.0;
  LeaderPolicy leader = LeaderPolicy::ConstantVelocity;

  std::size_t size() const { return x.size(); }
};

std::vector<double> micro_rhs(FollowModel model, const MicroState& state,
                              const ModelParameters& params);

/// Largest |d(dv_i/dt)/dv_i| over the platoon; bounds the explicit step size.
double stiffness(FollowModel model, const MicroState& state, const ModelParameters& params);

/// Classical RK4 on (x, v); velocities are clamped to [0, w] afterwards. A
/// step whose stages would bring two cars within H is retried as two half
/// steps, at most 20 levels deep.
MicroState rk4_step(const MicroState& state, double dt, FollowModel model,
                    const ModelParameters& params);

/// Normalized density H/l_i and velocity v_i of each gap, resampled
/// piecewise-constant onto the cell centres x_lo + (j + 1/2) dx. Cells
/// outside the platoon get (0, 0).
std::vector<Primitive> density_reconstruct(const MicroState& state, double x_lo, double dx,
                                           std::size_t n);

/// Places n cars on [x_lo, x_hi] so that every gap holds the same amount
/// H of occupied road: H = (integral of rho_0 over [x_lo, x_hi]) / n.
MicroState place_platoon(const RiemannData& data, double x_lo, double x_hi, std::size_t n);

struct MicroConfig {
  FollowModel model = FollowModel::RascleFollow;
  ModelParameters params;
  RiemannData initial;
  double platoon_lo = 0.0;
  double platoon_hi = 1.0;
  std::size_t n_cars = 100;
  double t_end = 0.0;
  double max_dt = 1e-3;
  double stiffness_factor = 0.5;  ///< dt <= stiffness_factor / stiffness
  std::vector<double> output_times;
  double grid_lo = 0.0;
  double grid_hi = 1.0;
  std::size_t grid_cells = 100;
};

struct MicroRunResult {
  std::vector<MicroState> snapshots;           ///< initial, output times, t_end
  std::vector<std::vector<Primitive>> fields;  ///< reconstruction of each snapshot
  double grid_lo = 0.0;
  double dx = 0.0;
  std::size_t steps = 0;
};

MicroRunResult run_micro(const MicroConfig& config);

}  // namespace traffic::micro
