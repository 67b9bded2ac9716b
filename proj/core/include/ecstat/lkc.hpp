#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "ecstat/ec_curve.hpp"
#include "ecstat/grid.hpp"
#include "ecstat/rng.hpp"

namespace ecstat {

/// Estimated Lipschitz-Killing curvatures L_1..L_D. L_0 is the (known) domain
/// EC and is carried as metadata, never estimated. When present, cov is the
/// unbiased sample covariance of the per-field estimates that produced the
/// mean.
struct LKCVector {
  std::int64_t l0 = 1;
  std::vector<double> lkc;
  std::optional<Eigen::MatrixXd> cov;
  int n_used = 0;

  int max_order() const { return static_cast<int>(lkc.size()); }
  void validate() const;
};

/// Hermite projection estimator from a single EC curve (closed form over the
/// critical values; no integral is evaluated):
///   L_d = (2pi)^{d/2}/d! * sum_m (a_m - a_{m+1}) H_d(u_m),
/// with a_0 = l0 and a_{M+1} = 0.
LKCVector hpe_single(const ECCurve& curve, int max_order);

/// Mean of per-curve HPEs; with_cov adds the unbiased sample covariance of
/// the per-curve estimates (requires at least two curves).
LKCVector hpe_sample(const std::vector<ECCurve>& curves, int max_order, bool with_cov = true);

/// Ordinary least squares of the pinned average curve on the EC densities at
/// the given levels: design X_{ld} = rho_d(u_l), response
/// y_l = chi(u_l) - l0 Phi+(u_l).
LKCVector lkc_regression(const StepFunction& avg_curve, const std::vector<double>& levels,
                         int max_order);
LKCVector lkc_regression(const std::function<double(double)>& avg_curve, double l0,
                         const std::vector<double>& levels, int max_order);

/// Standardized residuals R_n = (f_n - mean) / sqrt(sum_n (f_n - mean)^2),
/// which satisfy sum_n R_n(s) = 0 and sum_n R_n(s)^2 = 1 pointwise. Throws
/// when some in-mask location has zero pointwise variance.
FieldSample standardize(const FieldSample& raw);

/// Scale-only normalization R_n = f_n / sqrt(sum_n f_n^2) for inputs whose
/// mean is known to be zero (the "theoretical" scenario). The unit
/// sum-of-squares half of the residual conditions holds; the zero-sum half is
/// not guaranteed and the result is flagged accordingly.
FieldSample normalize_scale_only(const FieldSample& raw);

/// Unit-variance residuals sqrt(N) R_n = (f_n - mean)/sigma_hat with
/// sigma_hat^2(s) = (1/N) sum_n (f_n - mean)^2. This is the
/// experimental-scenario input for the curve-based estimators, which need
/// variance-one fields; the multiplier bootstrap keeps the plain
/// standardized residuals instead. Tagged raw so it cannot be mistaken for
/// them.
FieldSample standardize_unit_variance(const FieldSample& raw);

/// Deterministic linear combination sum_n g_n R_n (the multiplier field for a
/// fixed weight vector; also the test hook for forcing g).
GridField gmf_combine(const FieldSample& residuals, std::span<const double> g);

/// One Gaussian multiplier field draw with g ~ N(0, I_N) from the engine.
GridField gmf_draw(const FieldSample& residuals, std::mt19937_64& eng);

struct BHPEResult {
  LKCVector lkc;            // mean over the bootstrap draws; no cov
  std::vector<double> se;   // Monte Carlo standard error of each mean entry
  int m_draws = 0;
};

/// Bootstrapped HPE: mean of hpe_single over m_draws independent multiplier
/// fields. Draw m uses the substream seed.stream("bootstrap", m), so the
/// result does not depend on worker scheduling; the reduction is an ordered
/// pairwise sum.
BHPEResult bhpe(const FieldSample& residuals, int m_draws, int max_order, Connectivity conn,
                const RngSeed& seed, int jobs = 1);

/// {"l0":..., "lkc":[...], "cov":[[...]]|null, "n":..., "estimator":...,
///  "M":...|null, "seed":...|null}; the bHPE additionally reports its
/// bootstrap standard errors under "se".
std::string lkc_to_json(const LKCVector& lkc, const std::string& estimator,
                        std::optional<int> m_draws = std::nullopt,
                        std::optional<std::uint64_t> seed = std::nullopt,
                        const std::vector<double>* bootstrap_se = nullptr);

}  // namespace ecstat
