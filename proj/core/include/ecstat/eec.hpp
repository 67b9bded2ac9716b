#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "ecstat/ec_curve.hpp"
#include "ecstat/lkc.hpp"

namespace ecstat {

/// Plug-in expected EC curve EEC(u) = l0 Phi+(u) + sum_d L_d rho_d(u) for an
/// estimated (or known) LKC vector. Tends to l0 as u -> -inf and to 0 as
/// u -> +inf.
struct EECModel {
  std::int64_t l0 = 1;
  LKCVector lkc;

  static EECModel from_lkc(const LKCVector& lkc);
};

double eec_evaluate(const EECModel& model, double u);

/// Analytic derivative of the plug-in curve; matches central differences (the
/// sign convention is fixed by that check, not by any printed formula).
double eec_derivative(const EECModel& model, double u);

/// Covariance function C(u,v) = sum_{d,d'} sigma_{dd'} rho_d(u) rho_{d'}(v)
/// of the plug-in curve. Requires the model's LKC covariance.
double eec_cov(const EECModel& model, double u, double v);

/// Pointwise two-sided confidence band
///   EEC(u) +/- z_{1-alpha/2} sqrt(C(u,u)/N).
std::array<double, 2> eec_band(const EECModel& model, double u, double alpha_level);

/// Smoothed EC curve of a single field: project, then plug the LKCs back in.
EECModel smoothed_ec(const ECCurve& curve, int max_order);

/// Nonparametric band from the pointwise sample variance of raw EC curves:
///   mean(u) +/- z_{1-alpha/2} sqrt(var(u)/N).
std::array<double, 2> nonparametric_band(const std::vector<ECCurve>& curves, double u,
                                         double alpha_level);

struct ThresholdResult {
  double alpha = 0.0;
  double u_hat = 0.0;
  double se = 0.0;               // NaN when the model has no covariance
  std::array<double, 2> ci95{};  // u_hat +/- z_{0.975} * se
  bool ill_conditioned = false;  // |EEC'(u_hat)| below 1e-8
};

/// Largest u in [lo, hi] with EEC(u) = alpha, found by a downward bracket
/// scan (step 0.05) plus bisection to |EEC(u) - alpha| <= 1e-10. The standard
/// error follows Var[u_hat] = C(u,u) / (N EEC'(u)^2).
ThresholdResult solve_threshold(const EECModel& model, double alpha, double lo = 0.0,
                                double hi = 8.0);

/// CSV export `u,eec,lo,hi` on the closed grid [lo, hi] with the given step.
/// Band columns are left empty when the model carries no covariance.
void save_eec_csv(const EECModel& model, double lo, double hi, double step, double alpha_level,
                  const std::string& path);

/// {"alpha":..., "u":..., "se":...|null, "ci95":[...]|null,
///  "ill_conditioned":...}.
std::string threshold_to_json(const ThresholdResult& result);

}  // namespace ecstat
