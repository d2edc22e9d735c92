#pragma once

#include <functional>

#include "traffic/core.hpp"

// Kinetic closure: headway statistics and the momentum-source coefficients
// obtained from the one-node (delta) closure of the kinetic models.
namespace traffic::closure {

/// rho / (1 - rho H_B). Throws DomainError unless 0 <= rho < 1/H_B.
double reduced_density(double rho, double H_B);

/// Shifted exponential headway density q(h; rho), supported on [H_B, inf).
double headway_pdf(double h, double rho, double H_B);

/// P_B = 1 - (1 - rho H_B) exp(-reduced_density * H_B).
double braking_probability(double rho, double H_B);

enum class ClosureVariant { BoltzmannEx1, BoltzmannEx2, FokkerPlanckEta1, FokkerPlanckEta2 };

/// Closed Enskog (interaction flux) term E for the given interaction law.
///
/// The braking branch (du_dx < 0) uses q_B, P_B and H_B; the acceleration
/// branch (du_dx > 0) uses q_A and H_A. The q weights are taken verbatim from
/// `params`; the macroscopic coefficients coeff_a/coeff_b correspond to
/// q_B = q(H_B; rho) and q_A = q(H_A; rho).
double enskog_term(ClosureVariant variant, double rho, double u, double du_dx,
                   const ModelParameters& params);

/// Velocity factor f(u) entering the general coefficient a(rho, u).
struct VelocityFactor {
  std::function<double(double)> value;
  std::function<double(double)> derivative;

  static VelocityFactor constant(double c);
};

double coeff_a(double rho, double u, int du_sign, const ModelParameters& params,
               const VelocityFactor& f_A, const VelocityFactor& f_B);
double coeff_a(double rho, double u, int du_sign, const ModelParameters& params);
double coeff_b(double rho, int du_sign, const ModelParameters& params);

/// a(rho) = v_ref / (1/(rho H) - 1).
double coeff_a_simplified(double rho, const ModelParameters& params);
/// b(rho) = H / (1/(rho H) - 1).
double coeff_b_simplified(double rho, const ModelParameters& params);

/// b(rho) * min(|du_dx|, C_limit) with the simplified b.
double merged_coefficient(double rho, double du_dx, const ModelParameters& params);

/// Coefficient functions and their density/velocity derivatives as consumed by
/// the macroscopic solver. Inputs are assumed already clamped to the valid range.
class CoefficientProfile {
 public:
  explicit CoefficientProfile(const ModelParameters& params,
                              CoefficientForm form = CoefficientForm::Simplified,
                              VelocityFactor f_A = {}, VelocityFactor f_B = {});

  CoefficientForm form() const { return form_; }

  double a(double rho, double u, int du_sign) const;
  double da_drho(double rho, double u, int du_sign) const;
  double da_du(double rho, double u, int du_sign) const;

  double b(double rho, int du_sign) const;
  double db_drho(double rho, int du_sign) const;

 private:
  ModelParameters params_;
  CoefficientForm form_;
  VelocityFactor f_A_;
  VelocityFactor f_B_;
};

}  // namespace traffic::closure
