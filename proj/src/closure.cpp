#include "traffic/closure.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace traffic::closure {

namespace {

struct HeadwayTerms {
  double gap;       // 1 - rho H_B
  double reduced;   // rho / gap
  double dreduced;  // d reduced / d rho
};

HeadwayTerms headway_terms(double rho, double H_B) {
  const double gap = 1.0 - rho * H_B;
  return {gap, rho / gap, 1.0 / (gap * gap)};
}

double braking_probability_unchecked(const HeadwayTerms& h, double H_B) {
  return 1.0 - h.gap * std::exp(-h.reduced * H_B);
}

double braking_probability_derivative(const HeadwayTerms& h, double H_B) {
  return H_B * std::exp(-h.reduced * H_B) * (1.0 + 1.0 / h.gap);
}

void check_density(double rho, double H_B, const char* who) {
  if (!(rho >= 0.0) || rho * H_B >= 1.0)
    throw DomainError(std::string(who) + ": density outside [0, 1/H_B)");
}

}  // namespace

double reduced_density(double rho, double H_B) {
  check_density(rho, H_B, "reduced_density");
  return rho / (1.0 - rho * H_B);
}

double headway_pdf(double h, double rho, double H_B) {
  const double rt = reduced_density(rho, H_B);
  if (h < H_B) return 0.0;
  return rt * std::exp(-rt * (h - H_B));
}

double braking_probability(double rho, double H_B) {
  check_density(rho, H_B, "braking_probability");
  return braking_probability_unchecked(headway_terms(rho, H_B), H_B);
}

double enskog_term(ClosureVariant variant, double rho, double u, double du_dx,
                   const ModelParameters& p) {
  check_density(rho, p.H_B, "enskog_term");
  if (!(u >= 0.0 && u <= p.w)) throw DomainError("enskog_term: velocity outside [0, w]");
  if (du_dx == 0.0) return 0.0;

  const bool braking = du_dx < 0.0;
  const double PB = braking_probability(rho, p.H_B);
  const double weight = braking ? p.q_B * PB : p.q_A;
  const double threshold = braking ? p.H_B : p.H_A;

  switch (variant) {
    case ClosureVariant::BoltzmannEx1:
      return -weight * rho * threshold * threshold * du_dx * std::abs(du_dx);
    case ClosureVariant::BoltzmannEx2:
      if (braking) return -weight * rho * threshold * 0.5 * (1.0 - p.beta) * u * du_dx;
      return -weight * rho * threshold * 0.5 * (std::min(p.alpha * u, p.w) - u) * du_dx;
    case ClosureVariant::FokkerPlanckEta1:
      return -p.v_ref * weight * rho * threshold * du_dx;
    case ClosureVariant::FokkerPlanckEta2:
      return -p.c_eta * weight * rho * threshold * threshold * std::abs(du_dx) * du_dx;
  }
  return 0.0;
}

VelocityFactor VelocityFactor::constant(double c) {
  return {[c](double) { return c; }, [](double) { return 0.0; }};
}

double coeff_a(double rho, double u, int du_sign, const ModelParameters& params,
               const VelocityFactor& f_A, const VelocityFactor& f_B) {
  check_density(rho, params.H_B, "coeff_a");
  return CoefficientProfile(params, CoefficientForm::General, f_A, f_B).a(rho, u, du_sign);
}

double coeff_a(double rho, double u, int du_sign, const ModelParameters& params) {
  return coeff_a(rho, u, du_sign, params, {}, {});
}

double coeff_b(double rho, int du_sign, const ModelParameters& params) {
  check_density(rho, params.H_B, "coeff_b");
  return CoefficientProfile(params, CoefficientForm::General).b(rho, du_sign);
}

double coeff_a_simplified(double rho, const ModelParameters& params) {
  check_density(rho, params.H, "coeff_a_simplified");
  return CoefficientProfile(params).a(rho, 0.0, 1);
}

double coeff_b_simplified(double rho, const ModelParameters& params) {
  check_density(rho, params.H, "coeff_b_simplified");
  return CoefficientProfile(params).b(rho, 1);
}

double merged_coefficient(double rho, double du_dx, const ModelParameters& params) {
  return coeff_b_simplified(rho, params) * std::min(std::abs(du_dx), params.C_limit);
}

CoefficientProfile::CoefficientProfile(const ModelParameters& params, CoefficientForm form,
                                       VelocityFactor f_A, VelocityFactor f_B)
    : params_(params), form_(form), f_A_(std::move(f_A)), f_B_(std::move(f_B)) {
  if (!f_A_.value) f_A_ = VelocityFactor::constant(params.v_ref);
  if (!f_B_.value) f_B_ = VelocityFactor::constant(params.v_ref);
  if (!f_A_.derivative) f_A_.derivative = [](double) { return 0.0; };
  if (!f_B_.derivative) f_B_.derivative = [](double) { return 0.0; };
}

// General form, with r = reduced density:
//   braking:      a = H_B P_B r f_B(u),              b = H_B^2 P_B r
//   acceleration: a = H_A r exp(-r (H_A-H_B)) f_A(u), b = H_A^2 r exp(-r (H_A-H_B))
// Simplified form: a = v_ref H rho/(1 - rho H), b = H^2 rho/(1 - rho H).

double CoefficientProfile::a(double rho, double u, int du_sign) const {
  if (form_ == CoefficientForm::Simplified) {
    const double s = rho * params_.H;
    return params_.v_ref * s / (1.0 - s);
  }
  const auto h = headway_terms(rho, params_.H_B);
  if (du_sign < 0)
    return params_.H_B * braking_probability_unchecked(h, params_.H_B) * h.reduced * f_B_.value(u);
  return params_.H_A * h.reduced * std::exp(-h.reduced * (params_.H_A - params_.H_B)) *
         f_A_.value(u);
}

double CoefficientProfile::da_drho(double rho, double u, int du_sign) const {
  if (form_ == CoefficientForm::Simplified) {
    const double g = 1.0 - rho * params_.H;
    return params_.v_ref * params_.H / (g * g);
  }
  const auto h = headway_terms(rho, params_.H_B);
  if (du_sign < 0) {
    const double PB = braking_probability_unchecked(h, params_.H_B);
    const double dPB = braking_probability_derivative(h, params_.H_B);
    return params_.H_B * f_B_.value(u) * (dPB * h.reduced + PB * h.dreduced);
  }
  const double dH = params_.H_A - params_.H_B;
  const double e = std::exp(-h.reduced * dH);
  return params_.H_A * f_A_.value(u) * e * h.dreduced * (1.0 - h.reduced * dH);
}

double CoefficientProfile::da_du(double rho, double u, int du_sign) const {
  if (form_ == CoefficientForm::Simplified) return 0.0;
  const auto h = headway_terms(rho, params_.H_B);
  if (du_sign < 0)
    return params_.H_B * braking_probability_unchecked(h, params_.H_B) * h.reduced *
           f_B_.derivative(u);
  return params_.H_A * h.reduced * std::exp(-h.reduced * (params_.H_A - params_.H_B)) *
         f_A_.derivative(u);
}

double CoefficientProfile::b(double rho, int du_sign) const {
  if (form_ == CoefficientForm::Simplified) {
    const double s = rho * params_.H;
    return params_.H * s / (1.0 - s);
  }
  const auto h = headway_terms(rho, params_.H_B);
  if (du_sign < 0)
    return params_.H_B * params_.H_B * braking_probability_unchecked(h, params_.H_B) * h.reduced;
  return params_.H_A * params_.H_A * h.reduced *
         std::exp(-h.reduced * (params_.H_A - params_.H_B));
}

double CoefficientProfile::db_drho(double rho, int du_sign) const {
  if (form_ == CoefficientForm::Simplified) {
    const double g = 1.0 - rho * params_.H;
    return params_.H * params_.H / (g * g);
  }
  const auto h = headway_terms(rho, params_.H_B);
  if (du_sign < 0) {
    const double PB = braking_probability_unchecked(h, params_.H_B);
    const double dPB = braking_probability_derivative(h, params_.H_B);
    return params_.H_B * params_.H_B * (dPB * h.reduced + PB * h.dreduced);
  }
  const double dH = params_.H_A - params_.H_B;
  const double e = std::exp(-h.reduced * dH);
  return params_.H_A * params_.H_A * e * h.dreduced * (1.0 - h.reduced * dH);
}

}  // namespace traffic::closure
