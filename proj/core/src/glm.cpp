#include "ecstat/glm.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ecstat/errors.hpp"

namespace ecstat {

void DesignMatrix::validate() const {
  if (X.rows() <= X.cols())
    throw ValidationError("design matrix needs more observations than regressors");
  if (contrast.size() != X.cols())
    throw ValidationError("contrast length does not match the number of regressors");
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  qr.setThreshold(1e-10);
  if (qr.rank() < X.cols()) throw ValidationError("design matrix is rank deficient");
}

bool DesignMatrix::has_intercept() const {
  Eigen::VectorXd ones = Eigen::VectorXd::Ones(X.rows());
  Eigen::VectorXd a = X.householderQr().solve(ones);
  return (X * a - ones).lpNorm<Eigen::Infinity>() <= 1e-8;
}

DesignMatrix load_design_csv(const std::string& design_path, const std::string& contrast_path) {
  std::ifstream in(design_path);
  if (!in) throw IoError("cannot open: " + design_path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw IoError("design CSV: cannot parse \"" + cell + "\" in " + design_path);
      }
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw IoError("design CSV: ragged rows in " + design_path);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw IoError("design CSV is empty: " + design_path);

  DesignMatrix d;
  d.X.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      d.X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }

  std::ifstream cin_(contrast_path);
  if (!cin_) throw IoError("cannot open: " + contrast_path);
  nlohmann::json j = nlohmann::json::parse(cin_, nullptr, false);
  if (j.is_discarded() || !j.is_object() || !j.contains("contrast"))
    throw IoError("contrast JSON must be an object with a \"contrast\" array: " + contrast_path);
  auto c = j["contrast"].get<std::vector<double>>();
  d.contrast = Eigen::Map<Eigen::VectorXd>(c.data(), static_cast<Eigen::Index>(c.size()));
  d.validate();
  return d;
}

GLMFit fit_pointwise(const FieldSample& sample, const DesignMatrix& design) {
  design.validate();
  const int n = design.n();
  const int p = design.p();
  if (static_cast<int>(sample.size()) != n)
    throw ValidationError("sample size " + std::to_string(sample.size()) +
                          " does not match design rows " + std::to_string(n));

  const GridField& proto = sample.field(0);
  const std::int64_t cells = proto.size();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(design.X);

  std::vector<std::vector<double>> beta(static_cast<std::size_t>(p),
                                        std::vector<double>(static_cast<std::size_t>(cells), 0.0));
  std::vector<std::vector<double>> resid(static_cast<std::size_t>(n),
                                         std::vector<double>(static_cast<std::size_t>(cells), 0.0));

  Eigen::VectorXd y(n);
  for (std::int64_t s = 0; s < cells; ++s) {
    if (!proto.inside(s)) continue;
    for (int i = 0; i < n; ++i) y(i) = sample.field(static_cast<std::size_t>(i)).value(s);
    Eigen::VectorXd b = qr.solve(y);
    Eigen::VectorXd e = y - design.X * b;
    for (int j = 0; j < p; ++j) beta[static_cast<std::size_t>(j)][static_cast<std::size_t>(s)] = b(j);
    for (int i = 0; i < n; ++i) resid[static_cast<std::size_t>(i)][static_cast<std::size_t>(s)] = e(i);
  }

  std::vector<GridField> beta_fields;
  beta_fields.reserve(static_cast<std::size_t>(p));
  for (int j = 0; j < p; ++j) beta_fields.push_back(proto.with_values(std::move(beta[static_cast<std::size_t>(j)])));
  std::vector<GridField> resid_fields;
  resid_fields.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) resid_fields.push_back(proto.with_values(std::move(resid[static_cast<std::size_t>(i)])));
  return GLMFit{std::move(beta_fields), FieldSample(std::move(resid_fields), Provenance::raw)};
}

GridField zscore_field(const GLMFit& fit, const DesignMatrix& design) {
  const int n = design.n();
  const int p = design.p();
  const GridField& proto = fit.residuals.field(0);
  const std::int64_t cells = proto.size();

  // c'(X'X)^{-1} c through the R factor: solve R' w = c, then q = |w|^2.
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(design.X);
  Eigen::MatrixXd r = qr.matrixQR().topRows(p).triangularView<Eigen::Upper>();
  Eigen::VectorXd w = r.transpose().triangularView<Eigen::Lower>().solve(design.contrast);
  const double q = w.squaredNorm();

  std::vector<double> z(static_cast<std::size_t>(cells), 0.0);
  for (std::int64_t s = 0; s < cells; ++s) {
    if (!proto.inside(s)) continue;
    double eta = 0.0;
    for (int j = 0; j < p; ++j) eta += design.contrast(j) * fit.beta[static_cast<std::size_t>(j)].value(s);
    double ss = 0.0;
    for (int i = 0; i < n; ++i) {
      const double e = fit.residuals.field(static_cast<std::size_t>(i)).value(s);
      ss += e * e;
    }
    if (ss == 0.0)
      throw ValidationError("zero residual norm at flat index " + std::to_string(s));
    const double sigma2 = ss / static_cast<double>(n - p);
    z[static_cast<std::size_t>(s)] = eta / std::sqrt(sigma2 * q);
  }
  return proto.with_values(std::move(z));
}

FieldSample glm_standardized_residuals(const FieldSample& residuals) {
  const std::size_t n = residuals.size();
  if (n < 2) throw ValidationError("need at least two residual fields");
  const GridField& proto = residuals.field(0);
  const std::int64_t cells = proto.size();

  std::vector<std::vector<double>> out(n, std::vector<double>(static_cast<std::size_t>(cells), 0.0));
  bool zero_sum = true;
  for (std::int64_t s = 0; s < cells; ++s) {
    if (!proto.inside(s)) continue;
    double ss = 0.0, sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double e = residuals.field(i).value(s);
      ss += e * e;
      sum += e;
    }
    if (ss == 0.0)
      throw ValidationError("zero residual norm at flat index " + std::to_string(s));
    const double inv = 1.0 / std::sqrt(ss);
    for (std::size_t i = 0; i < n; ++i) out[i][static_cast<std::size_t>(s)] = residuals.field(i).value(s) * inv;
    zero_sum = zero_sum && std::abs(sum * inv) <= 1e-10;
  }

  std::vector<GridField> fields;
  fields.reserve(n);
  for (std::size_t i = 0; i < n; ++i) fields.push_back(proto.with_values(std::move(out[i])));
  FieldSample result(std::move(fields), Provenance::standardized_residual);
  result.set_zero_mean_guaranteed(zero_sum);
  return result;
}

namespace {

// One masked, renormalized pass along `axis`.
std::vector<double> smooth_axis(const GridField& proto, const std::vector<double>& in, int axis,
                                double sd) {
  const auto& shape = proto.shape();
  const std::int64_t len = shape[static_cast<std::size_t>(axis)];
  std::int64_t stride = 1;
  for (int a = proto.dim() - 1; a > axis; --a) stride *= shape[static_cast<std::size_t>(a)];
  const std::int64_t radius = static_cast<std::int64_t>(std::ceil(4.0 * sd));
  std::vector<double> w(static_cast<std::size_t>(2 * radius + 1));
  for (std::int64_t j = -radius; j <= radius; ++j) {
    w[static_cast<std::size_t>(j + radius)] = std::exp(-static_cast<double>(j * j) / (2.0 * sd * sd));
  }

  std::vector<double> out(in.size(), 0.0);
  const std::int64_t cells = proto.size();
  for (std::int64_t s = 0; s < cells; ++s) {
    if (!proto.inside(s)) continue;
    const std::int64_t pos = (s / stride) % len;
    double num = 0.0, den = 0.0;
    const std::int64_t j0 = std::max<std::int64_t>(-radius, -pos);
    const std::int64_t j1 = std::min<std::int64_t>(radius, len - 1 - pos);
    for (std::int64_t j = j0; j <= j1; ++j) {
      const std::int64_t t = s + j * stride;
      if (!proto.inside(t)) continue;
      const double wj = w[static_cast<std::size_t>(j + radius)];
      num += wj * in[static_cast<std::size_t>(t)];
      den += wj;
    }
    out[static_cast<std::size_t>(s)] = num / den;
  }
  return out;
}

}  // namespace

GridField gaussian_smooth(const GridField& field, double sd) {
  if (!(sd > 0.0)) throw ValidationError("smoothing sd must be positive");
  std::vector<double> values = field.values();
  for (int axis = 0; axis < field.dim(); ++axis) {
    values = smooth_axis(field, values, axis, sd);
  }
  return field.with_values(std::move(values));
}

FieldSample gaussian_smooth(const FieldSample& sample, double sd) {
  std::vector<GridField> out;
  out.reserve(sample.size());
  for (const GridField& f : sample.fields()) out.push_back(gaussian_smooth(f, sd));
  return FieldSample(std::move(out), sample.provenance());
}

}  // namespace ecstat
