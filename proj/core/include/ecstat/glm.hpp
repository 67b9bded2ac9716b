#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ecstat/grid.hpp"

namespace ecstat {

/// Constant design matrix X (N observations x P regressors) and the contrast
/// vector c of interest. N > P and full column rank are validated.
struct DesignMatrix {
  Eigen::MatrixXd X;
  Eigen::VectorXd contrast;

  int n() const { return static_cast<int>(X.rows()); }
  int p() const { return static_cast<int>(X.cols()); }
  void validate() const;

  /// True when the all-ones vector lies in the column span, i.e. residuals
  /// sum to zero pointwise.
  bool has_intercept() const;
};

/// CSV with one row per observation; contrast read separately from JSON
/// ({"contrast": [c_1, ..., c_P]}).
DesignMatrix load_design_csv(const std::string& design_path, const std::string& contrast_path);

struct GLMFit {
  std::vector<GridField> beta;  // P coefficient fields
  FieldSample residuals;        // N residual fields, provenance raw
};

/// Pointwise least squares Y(s) = X beta(s) + e(s), solved by QR (never by
/// explicit normal equations). Residuals are orthogonal to the design columns
/// at every location.
GLMFit fit_pointwise(const FieldSample& sample, const DesignMatrix& design);

/// z(s) = c' beta(s) / sqrt(sigma2(s) c'(X'X)^{-1} c) with
/// sigma2(s) = |e(s)|^2 / (N - P). Throws when some in-mask location has zero
/// residual norm.
GridField zscore_field(const GLMFit& fit, const DesignMatrix& design);

/// Standardized GLM residuals R(s) = e(s)/|e(s)|. The unit sum-of-squares
/// half of the residual conditions holds exactly; the zero-sum half holds
/// when the design spans an intercept and is detected and flagged on the
/// returned sample.
FieldSample glm_standardized_residuals(const FieldSample& residuals);

/// Separable Gaussian filter (sd in voxels, truncated at 4 sd), renormalized
/// over the in-mask/in-grid kernel mass. Optional pre-step before
/// standardizing residuals; off unless requested.
GridField gaussian_smooth(const GridField& field, double sd);
FieldSample gaussian_smooth(const FieldSample& sample, double sd);

}  // namespace ecstat
