#include "ecstat/lkc.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include <json.hpp>

#include "ecstat/errors.hpp"
#include "ecstat/hermite.hpp"
#include "ecstat/parallel.hpp"

namespace ecstat {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double factorial(int n) {
  double f = 1.0;
  for (int k = 2; k <= n; ++k) f *= k;
  return f;
}

std::string index_string(const GridField& f, std::int64_t flat) {
  auto idx = f.unflatten(flat);
  std::string s = "(";
  for (int a = 0; a < f.dim(); ++a) {
    if (a) s += ",";
    s += std::to_string(idx[static_cast<std::size_t>(a)]);
  }
  return s + ")";
}

}  // namespace

void LKCVector::validate() const {
  if (lkc.empty()) throw ValidationError("LKC vector must have at least one order");
  if (cov) {
    const Eigen::MatrixXd& c = *cov;
    if (c.rows() != max_order() || c.cols() != max_order())
      throw ValidationError("LKC covariance has wrong dimensions");
    for (int i = 0; i < c.rows(); ++i) {
      if (c(i, i) < 0.0) throw ValidationError("LKC covariance has negative diagonal");
      for (int j = 0; j < i; ++j) {
        if (std::abs(c(i, j) - c(j, i)) > 1e-12 * std::max(1.0, std::abs(c(i, j))))
          throw ValidationError("LKC covariance not symmetric");
      }
    }
  }
}

LKCVector hpe_single(const ECCurve& curve, int max_order) {
  if (max_order < 1) throw ValidationError("max order must be >= 1");
  LKCVector out;
  out.l0 = curve.l0();
  out.n_used = 1;
  out.lkc.resize(static_cast<std::size_t>(max_order));
  const auto& crit = curve.crit_values();
  const auto& deltas = curve.deltas();
  for (int d = 1; d <= max_order; ++d) {
    double acc = 0.0;
    for (std::size_t k = 0; k < crit.size(); ++k) {
      // a_m - a_{m+1} is the negative of the stored ascending jump.
      acc += static_cast<double>(-deltas[k]) * hermite(d, crit[k]);
    }
    out.lkc[static_cast<std::size_t>(d - 1)] = std::pow(kTwoPi, 0.5 * d) / factorial(d) * acc;
  }
  return out;
}

LKCVector hpe_sample(const std::vector<ECCurve>& curves, int max_order, bool with_cov) {
  const std::size_t n = curves.size();
  if (n == 0) throw ValidationError("hpe_sample: empty curve list");
  if (with_cov && n < 2)
    throw ValidationError("hpe_sample: covariance requires at least two curves");

  std::vector<LKCVector> singles;
  singles.reserve(n);
  for (const ECCurve& c : curves) singles.push_back(hpe_single(c, max_order));

  LKCVector out;
  out.l0 = singles.front().l0;
  out.n_used = static_cast<int>(n);
  out.lkc.resize(static_cast<std::size_t>(max_order));
  std::vector<double> col(n);
  for (int d = 0; d < max_order; ++d) {
    for (std::size_t i = 0; i < n; ++i) col[i] = singles[i].lkc[static_cast<std::size_t>(d)];
    out.lkc[static_cast<std::size_t>(d)] = pairwise_mean(col);
  }
  if (with_cov) {
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(max_order, max_order);
    std::vector<double> prods(n);
    for (int d = 0; d < max_order; ++d) {
      for (int e = d; e < max_order; ++e) {
        for (std::size_t i = 0; i < n; ++i) {
          prods[i] = (singles[i].lkc[static_cast<std::size_t>(d)] - out.lkc[static_cast<std::size_t>(d)]) *
                     (singles[i].lkc[static_cast<std::size_t>(e)] - out.lkc[static_cast<std::size_t>(e)]);
        }
        cov(d, e) = cov(e, d) = pairwise_sum(prods) / static_cast<double>(n - 1);
      }
    }
    out.cov = std::move(cov);
  }
  out.validate();
  return out;
}

LKCVector lkc_regression(const std::function<double(double)>& avg_curve, double l0,
                         const std::vector<double>& levels, int max_order) {
  if (max_order < 1) throw ValidationError("max order must be >= 1");
  const int p = static_cast<int>(levels.size());
  if (p < max_order)
    throw ValidationError("regression needs at least as many levels as orders");

  Eigen::MatrixXd x(p, max_order);
  Eigen::VectorXd y(p);
  for (int l = 0; l < p; ++l) {
    const double u = levels[static_cast<std::size_t>(l)];
    for (int d = 1; d <= max_order; ++d) x(l, d - 1) = ec_density(d, u);
    y(l) = avg_curve(u) - l0 * gauss_tail(u);
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  qr.setThreshold(1e-10);
  if (qr.rank() < max_order)
    throw NumericalError("regression design matrix is rank deficient at the chosen levels");
  Eigen::VectorXd beta = qr.solve(y);

  LKCVector out;
  out.l0 = std::llround(l0);
  out.n_used = 0;
  out.lkc.assign(beta.data(), beta.data() + max_order);
  return out;
}

LKCVector lkc_regression(const StepFunction& avg_curve, const std::vector<double>& levels,
                         int max_order) {
  return lkc_regression([&](double u) { return avg_curve.evaluate(u); }, avg_curve.base(),
                        levels, max_order);
}

namespace {

FieldSample normalize_impl(const FieldSample& raw, bool center) {
  const std::size_t n = raw.size();
  if (n < 2) throw ValidationError("residual construction requires at least two fields");
  const GridField& proto = raw.field(0);
  const std::int64_t cells = proto.size();

  std::vector<double> mean(static_cast<std::size_t>(cells), 0.0);
  if (center) {
    for (std::size_t i = 0; i < n; ++i) {
      const auto& v = raw.field(i).values();
      for (std::int64_t s = 0; s < cells; ++s) mean[static_cast<std::size_t>(s)] += v[static_cast<std::size_t>(s)];
    }
    for (double& m : mean) m /= static_cast<double>(n);
  }

  std::vector<double> ss(static_cast<std::size_t>(cells), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& v = raw.field(i).values();
    for (std::int64_t s = 0; s < cells; ++s) {
      const double r = v[static_cast<std::size_t>(s)] - mean[static_cast<std::size_t>(s)];
      ss[static_cast<std::size_t>(s)] += r * r;
    }
  }
  for (std::int64_t s = 0; s < cells; ++s) {
    if (proto.inside(s) && ss[static_cast<std::size_t>(s)] == 0.0)
      throw ValidationError("degenerate location " + index_string(proto, s) +
                            ": zero pointwise variance across the sample");
  }

  std::vector<GridField> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& v = raw.field(i).values();
    std::vector<double> r(v.size(), 0.0);
    for (std::int64_t s = 0; s < cells; ++s) {
      if (!proto.inside(s)) continue;
      r[static_cast<std::size_t>(s)] = (v[static_cast<std::size_t>(s)] - mean[static_cast<std::size_t>(s)]) /
                                       std::sqrt(ss[static_cast<std::size_t>(s)]);
    }
    out.push_back(proto.with_values(std::move(r)));
  }
  FieldSample sample(std::move(out), Provenance::standardized_residual);
  sample.set_zero_mean_guaranteed(center);

  // (R1) is enforced to 1e-10 pointwise, not just assumed.
  for (std::int64_t s = 0; s < cells; ++s) {
    if (!proto.inside(s)) continue;
    double sum = 0.0, sum2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = sample.field(i).value(s);
      sum += r;
      sum2 += r * r;
    }
    if (center && std::abs(sum) > 1e-10)
      throw NumericalError("residual zero-sum violated at " + index_string(proto, s));
    if (std::abs(sum2 - 1.0) > 1e-10)
      throw NumericalError("residual unit sum-of-squares violated at " + index_string(proto, s));
  }
  return sample;
}

}  // namespace

FieldSample standardize(const FieldSample& raw) { return normalize_impl(raw, true); }

FieldSample normalize_scale_only(const FieldSample& raw) { return normalize_impl(raw, false); }

FieldSample standardize_unit_variance(const FieldSample& raw) {
  FieldSample res = standardize(raw);
  const double scale = std::sqrt(static_cast<double>(raw.size()));
  std::vector<GridField> out;
  out.reserve(res.size());
  for (const GridField& f : res.fields()) {
    std::vector<double> v = f.values();
    for (double& x : v) x *= scale;
    out.push_back(f.with_values(std::move(v)));
  }
  return FieldSample(std::move(out), Provenance::raw);
}

GridField gmf_combine(const FieldSample& residuals, std::span<const double> g) {
  if (g.size() != residuals.size())
    throw ValidationError("multiplier vector length does not match sample size");
  const GridField& proto = residuals.field(0);
  std::vector<double> out(static_cast<std::size_t>(proto.size()), 0.0);
  for (std::size_t i = 0; i < residuals.size(); ++i) {
    const double gi = g[i];
    const auto& v = residuals.field(i).values();
    for (std::size_t s = 0; s < out.size(); ++s) out[s] += gi * v[s];
  }
  if (proto.has_mask()) {
    // Keep masked-out cells at a defined value; consumers never read them.
    for (std::size_t s = 0; s < out.size(); ++s) {
      if (!proto.mask()[s]) out[s] = 0.0;
    }
  }
  return proto.with_values(std::move(out));
}

GridField gmf_draw(const FieldSample& residuals, std::mt19937_64& eng) {
  std::vector<double> g(residuals.size());
  for (double& gi : g) gi = normal_draw(eng);
  return gmf_combine(residuals, g);
}

BHPEResult bhpe(const FieldSample& residuals, int m_draws, int max_order, Connectivity conn,
                const RngSeed& seed, int jobs) {
  if (m_draws < 2) throw ValidationError("bhpe requires at least two bootstrap draws");
  if (residuals.provenance() != Provenance::standardized_residual)
    throw ValidationError("bhpe expects standardized residuals");

  Eigen::MatrixXd draws(m_draws, max_order);
  parallel_for(static_cast<std::size_t>(m_draws), jobs, [&](std::size_t m) {
    auto eng = seed.stream("bootstrap", m).engine();
    GridField field = gmf_draw(residuals, eng);
    LKCVector est = hpe_single(ec_curve(field, conn), max_order);
    for (int d = 0; d < max_order; ++d) draws(static_cast<Eigen::Index>(m), d) = est.lkc[static_cast<std::size_t>(d)];
  });

  BHPEResult out;
  out.m_draws = m_draws;
  out.lkc.l0 = domain_ec(residuals.field(0), conn).l0;
  out.lkc.n_used = static_cast<int>(residuals.size());
  out.lkc.lkc.resize(static_cast<std::size_t>(max_order));
  out.se.resize(static_cast<std::size_t>(max_order));
  std::vector<double> col(static_cast<std::size_t>(m_draws));
  for (int d = 0; d < max_order; ++d) {
    for (int m = 0; m < m_draws; ++m) col[static_cast<std::size_t>(m)] = draws(m, d);
    const double mean = pairwise_mean(col);
    out.lkc.lkc[static_cast<std::size_t>(d)] = mean;
    for (double& c : col) {
      const double r = c - mean;
      c = r * r;
    }
    const double var = pairwise_sum(col) / static_cast<double>(m_draws - 1);
    out.se[static_cast<std::size_t>(d)] = std::sqrt(var / static_cast<double>(m_draws));
  }
  return out;
}

std::string lkc_to_json(const LKCVector& lkc, const std::string& estimator,
                        std::optional<int> m_draws, std::optional<std::uint64_t> seed,
                        const std::vector<double>* bootstrap_se) {
  nlohmann::json j;
  j["l0"] = lkc.l0;
  j["lkc"] = lkc.lkc;
  if (lkc.cov) {
    std::vector<std::vector<double>> rows;
    for (int r = 0; r < lkc.cov->rows(); ++r) {
      std::vector<double> row;
      for (int c = 0; c < lkc.cov->cols(); ++c) row.push_back((*lkc.cov)(r, c));
      rows.push_back(std::move(row));
    }
    j["cov"] = rows;
  } else {
    j["cov"] = nullptr;
  }
  j["n"] = lkc.n_used;
  j["estimator"] = estimator;
  if (m_draws)
    j["M"] = *m_draws;
  else
    j["M"] = nullptr;
  if (seed)
    j["seed"] = *seed;
  else
    j["seed"] = nullptr;
  if (bootstrap_se) j["se"] = *bootstrap_se;
  return j.dump();
}

}  // namespace ecstat
