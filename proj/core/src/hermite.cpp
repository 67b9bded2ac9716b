#include "ecstat/hermite.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "ecstat/errors.hpp"

namespace ecstat {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr double kQuadLo = -9.0;
constexpr double kQuadHi = 9.0;
constexpr double kQuadTol = 1e-10;
constexpr int kQuadMaxDepth = 48;

double factorial(int n) {
  double f = 1.0;
  for (int k = 2; k <= n; ++k) f *= k;
  return f;
}

struct SimpsonState {
  bool converged = true;
  long evals = 0;
};

constexpr long kQuadMaxEvals = 2'000'000;

double simpson(double a, double fa, double b, double fb, double fm) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adapt(const std::function<double(double)>& f, double a, double fa, double b, double fb,
             double m, double fm, double whole, double tol, int depth, SimpsonState& state) {
  if (!state.converged) return 0.0;  // already failed, unwind cheaply
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  state.evals += 2;
  if (!std::isfinite(flm) || !std::isfinite(frm))
    throw NumericalError("quadrature: integrand not finite");
  const double left = simpson(a, fa, m, fm, flm);
  const double right = simpson(m, fm, b, fb, frm);
  const double err = left + right - whole;
  if (std::abs(err) <= 15.0 * tol) return left + right + err / 15.0;
  if (depth >= kQuadMaxDepth || state.evals > kQuadMaxEvals) {
    state.converged = false;
    return left + right;
  }
  return adapt(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth + 1, state) +
         adapt(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth + 1, state);
}

double integrate(const std::function<double(double)>& f, double a, double b, double tol) {
  const double fa = f(a), fb = f(b), m = 0.5 * (a + b), fm = f(m);
  if (!std::isfinite(fa) || !std::isfinite(fb) || !std::isfinite(fm))
    throw NumericalError("quadrature: integrand not finite");
  SimpsonState state;
  const double whole = simpson(a, fa, b, fb, fm);
  double result = adapt(f, a, fa, b, fb, m, fm, whole, tol, 0, state);
  if (!state.converged)
    throw NumericalError("quadrature did not converge; input may not be integrable");
  return result;
}

}  // namespace

double hermite(int d, double u) {
  if (d < 0) throw ValidationError("Hermite order must be nonnegative");
  double prev = 1.0;  // H_0
  if (d == 0) return prev;
  double cur = u;  // H_1
  for (int k = 1; k < d; ++k) {
    double next = u * cur - static_cast<double>(k) * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

double ec_density(int d, double u) {
  if (d < 1) throw ValidationError("EC density order must be >= 1");
  return std::pow(kTwoPi, -0.5 * (d + 1)) * hermite(d - 1, u) * std::exp(-0.5 * u * u);
}

double ec_density_derivative(int d, double u) {
  return -std::sqrt(kTwoPi) * ec_density(d + 1, u);
}

double gauss_tail(double u) { return 0.5 * std::erfc(u / std::numbers::sqrt2); }

double gauss_density(double u) { return std::exp(-0.5 * u * u) / std::sqrt(kTwoPi); }

double gauss_quantile_upper(double p) {
  if (!(p > 0.0 && p < 1.0)) throw ValidationError("quantile probability must be in (0,1)");
  double lo = -40.0, hi = 40.0;
  for (int i = 0; i < 200; ++i) {
    double mid = 0.5 * (lo + hi);
    if (gauss_tail(mid) > p)
      lo = mid;
    else
      hi = mid;
    if (hi - lo < 1e-14 * std::max(1.0, std::abs(lo))) break;
  }
  return 0.5 * (lo + hi);
}

double ec_density_norm_sq(int d) {
  if (d < 1) throw ValidationError("EC density order must be >= 1");
  return std::pow(kTwoPi, -(d + 0.5)) * factorial(d - 1);
}

double weighted_inner(const std::function<double(double)>& pinned_g, int d) {
  if (d < 1) throw ValidationError("projector order must be >= 1");
  auto integrand = [&](double u) { return hermite(d - 1, u) * pinned_g(u); };
  double integral = integrate(integrand, kQuadLo, kQuadHi, kQuadTol);
  return std::pow(kTwoPi, 0.5 * d) / factorial(d - 1) * integral;
}

double weighted_inner_pinned_step(const StepFunction& chi, int d) {
  if (d < 1) throw ValidationError("projector order must be >= 1");
  const std::size_t k = chi.breakpoints();
  if (k == 0) {
    if (chi.base() != 0.0)
      throw ValidationError("step curve without breakpoints must be identically zero");
    return 0.0;
  }
  if (std::abs(chi.level_after(k - 1)) > 1e-7)
    throw ValidationError("step curve does not end at 0; projection integral diverges");

  // Integration by parts of int H_{d-1}(u) (chi(u) - chi.base Phi+(u)) du,
  // using H_d' = d H_{d-1}: the Phi+ part collapses onto the first breakpoint
  // and the step part telescopes over the antiderivative H_d/d.
  const std::vector<double>& u = chi.crit_values();
  double acc = chi.base() * hermite(d, u[0]);
  for (std::size_t m = 1; m < k; ++m) {
    acc += chi.level_before(m) * (hermite(d, u[m]) - hermite(d, u[m - 1]));
  }
  return std::pow(kTwoPi, 0.5 * d) / (factorial(d - 1) * d) * acc;
}

ECDensityBasis::ECDensityBasis(int max_order_) : max_order(max_order_) {
  if (max_order < 1) throw ValidationError("basis max order must be >= 1");
}

double ECDensityBasis::hermite(int d, double u) const {
  if (d > max_order + 1)
    throw ValidationError("Hermite order " + std::to_string(d) + " above basis limit");
  return ecstat::hermite(d, u);
}

double ECDensityBasis::density(int d, double u) const {
  if (d < 1 || d > max_order) throw ValidationError("EC density order out of basis range");
  return ecstat::ec_density(d, u);
}

}  // namespace ecstat
