#pragma once

#include <functional>

#include "ecstat/step_function.hpp"

namespace ecstat {

/// Probabilistic Hermite polynomial H_d(u), by the three-term recurrence
/// H_0 = 1, H_1 = u, H_{d+1}(u) = u H_d(u) - d H_{d-1}(u).
double hermite(int d, double u);

/// EC density rho_d(u) = (2pi)^{-(d+1)/2} H_{d-1}(u) exp(-u^2/2), d >= 1.
double ec_density(int d, double u);

/// d/du rho_d(u) = -sqrt(2pi) rho_{d+1}(u); the sign is fixed against finite
/// differences (see the derivative tests).
double ec_density_derivative(int d, double u);

/// Upper Gaussian tail P(N(0,1) > u).
double gauss_tail(double u);

/// Standard normal density.
double gauss_density(double u);

/// Inverse of gauss_tail: the u with P(N(0,1) > u) = p, for p in (0,1).
double gauss_quantile_upper(double p);

/// Squared norm of rho_d under the exp(u^2/2)-weighted inner product:
/// (2pi)^{-(d+1/2)} (d-1)!.
double ec_density_norm_sq(int d);

/// d-th Hermite projector of a pinned curve g (one that decays to 0 at both
/// ends): (2pi)^{d/2}/(d-1)! * integral of H_{d-1}(u) g(u) du, by adaptive
/// quadrature on [-9, 9] to 1e-10. Throws NumericalError when the quadrature
/// does not converge (non-integrable input).
double weighted_inner(const std::function<double(double)>& pinned_g, int d);

/// Same projector applied to chi - chi.base() * gauss_tail for a step curve
/// chi that ends at 0, evaluated exactly through the antiderivative H_d/d.
/// No quadrature is involved.
double weighted_inner_pinned_step(const StepFunction& chi, int d);

/// Validated order bundle for the EC densities of a D-dimensional domain.
struct ECDensityBasis {
  explicit ECDensityBasis(int max_order);

  int max_order;

  double hermite(int d, double u) const;
  double density(int d, double u) const;
};

}  // namespace ecstat
