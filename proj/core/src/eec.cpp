#include "ecstat/eec.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "ecstat/errors.hpp"
#include "ecstat/hermite.hpp"

namespace ecstat {

EECModel EECModel::from_lkc(const LKCVector& lkc) { return EECModel{lkc.l0, lkc}; }

double eec_evaluate(const EECModel& model, double u) {
  double acc = static_cast<double>(model.l0) * gauss_tail(u);
  for (int d = 1; d <= model.lkc.max_order(); ++d) {
    acc += model.lkc.lkc[static_cast<std::size_t>(d - 1)] * ec_density(d, u);
  }
  return acc;
}

double eec_derivative(const EECModel& model, double u) {
  double acc = -static_cast<double>(model.l0) * gauss_density(u);
  for (int d = 1; d <= model.lkc.max_order(); ++d) {
    acc += model.lkc.lkc[static_cast<std::size_t>(d - 1)] * ec_density_derivative(d, u);
  }
  return acc;
}

double eec_cov(const EECModel& model, double u, double v) {
  if (!model.lkc.cov)
    throw ValidationError("EEC covariance requires an LKC estimate with covariance");
  const Eigen::MatrixXd& sigma = *model.lkc.cov;
  const int order = model.lkc.max_order();
  double acc = 0.0;
  for (int d = 1; d <= order; ++d) {
    for (int e = 1; e <= order; ++e) {
      acc += sigma(d - 1, e - 1) * ec_density(d, u) * ec_density(e, v);
    }
  }
  return acc;
}

std::array<double, 2> eec_band(const EECModel& model, double u, double alpha_level) {
  if (model.lkc.n_used < 2)
    throw ValidationError("confidence band requires an estimate from at least two fields");
  const double z = gauss_quantile_upper(0.5 * alpha_level);
  const double center = eec_evaluate(model, u);
  const double half = z * std::sqrt(eec_cov(model, u, u) / model.lkc.n_used);
  return {center - half, center + half};
}

EECModel smoothed_ec(const ECCurve& curve, int max_order) {
  return EECModel::from_lkc(hpe_single(curve, max_order));
}

std::array<double, 2> nonparametric_band(const std::vector<ECCurve>& curves, double u,
                                         double alpha_level) {
  const std::size_t n = curves.size();
  if (n < 2) throw ValidationError("nonparametric band requires at least two curves");
  double mean = 0.0;
  for (const ECCurve& c : curves) mean += static_cast<double>(c.evaluate(u));
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (const ECCurve& c : curves) {
    const double r = static_cast<double>(c.evaluate(u)) - mean;
    var += r * r;
  }
  var /= static_cast<double>(n - 1);
  const double z = gauss_quantile_upper(0.5 * alpha_level);
  const double half = z * std::sqrt(var / static_cast<double>(n));
  return {mean - half, mean + half};
}

ThresholdResult solve_threshold(const EECModel& model, double alpha, double lo, double hi) {
  if (!(lo < hi)) throw ValidationError("threshold search interval is empty");
  constexpr double kScanStep = 0.05;
  constexpr double kTol = 1e-10;

  auto g = [&](double u) { return eec_evaluate(model, u) - alpha; };

  // Walk down from the top so the first sign change brackets the largest root.
  double b = hi;
  double gb = g(b);
  double a = b, ga = gb;
  bool found = false;
  while (b > lo) {
    a = std::max(lo, b - kScanStep);
    ga = g(a);
    if (ga == 0.0 || gb == 0.0 || (ga > 0.0) != (gb > 0.0)) {
      found = true;
      break;
    }
    b = a;
    gb = ga;
  }
  if (!found)
    throw NumericalError("no threshold with EEC(u) = alpha in the search interval");

  double mid = 0.5 * (a + b);
  for (int it = 0; it < 200; ++it) {
    mid = 0.5 * (a + b);
    const double gm = g(mid);
    if (std::abs(gm) <= kTol) break;
    if ((gm > 0.0) == (ga > 0.0)) {
      a = mid;
      ga = gm;
    } else {
      b = mid;
    }
  }

  ThresholdResult out;
  out.alpha = alpha;
  out.u_hat = mid;
  const double slope = eec_derivative(model, mid);
  out.ill_conditioned = std::abs(slope) < 1e-8;
  if (model.lkc.cov && model.lkc.n_used >= 1) {
    out.se = std::sqrt(eec_cov(model, mid, mid) / (model.lkc.n_used * slope * slope));
  } else {
    out.se = std::numeric_limits<double>::quiet_NaN();
  }
  const double z = gauss_quantile_upper(0.025);
  out.ci95 = {out.u_hat - z * out.se, out.u_hat + z * out.se};
  return out;
}

void save_eec_csv(const EECModel& model, double lo, double hi, double step, double alpha_level,
                  const std::string& path) {
  if (!(step > 0.0) || !(lo <= hi)) throw ValidationError("bad EEC export grid");
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path);
  out.precision(17);
  out << "u,eec,lo,hi\n";
  const bool bands = model.lkc.cov.has_value() && model.lkc.n_used >= 2;
  const std::int64_t steps = static_cast<std::int64_t>(std::floor((hi - lo) / step + 0.5));
  for (std::int64_t i = 0; i <= steps; ++i) {
    const double u = lo + static_cast<double>(i) * step;
    out << u << ',' << eec_evaluate(model, u) << ',';
    if (bands) {
      auto band = eec_band(model, u, alpha_level);
      out << band[0] << ',' << band[1];
    } else {
      out << ',';
    }
    out << '\n';
  }
}

std::string threshold_to_json(const ThresholdResult& result) {
  nlohmann::json j;
  j["alpha"] = result.alpha;
  j["u"] = result.u_hat;
  if (std::isnan(result.se)) {
    j["se"] = nullptr;
    j["ci95"] = nullptr;
  } else {
    j["se"] = result.se;
    j["ci95"] = result.ci95;
  }
  j["ill_conditioned"] = result.ill_conditioned;
  return j.dump();
}

}  // namespace ecstat
