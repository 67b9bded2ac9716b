#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "ecstat/ec_curve.hpp"
#include "ecstat/hermite.hpp"
#include "ecstat/rng.hpp"

using namespace ecstat;

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

TEST_CASE("hermite closed forms") {
  CHECK(hermite(0, 123.0) == 1.0);
  CHECK(hermite(1, -2.5) == -2.5);
  CHECK(hermite(2, 3.0) == doctest::Approx(8.0));           // u^2 - 1
  CHECK(hermite(3, 2.0) == doctest::Approx(2.0));           // u^3 - 3u
  CHECK(hermite(4, 1.5) == doctest::Approx(std::pow(1.5, 4) - 6 * 1.5 * 1.5 + 3));
  CHECK_THROWS_AS(hermite(-1, 0.0), ValidationError);
}

TEST_CASE("ec densities") {
  CHECK(ec_density(1, 0.0) == doctest::Approx(1.0 / kTwoPi).epsilon(1e-12));
  CHECK(ec_density(2, 0.0) == doctest::Approx(0.0));
  CHECK(ec_density(2, 1.0) ==
        doctest::Approx(std::pow(kTwoPi, -1.5) * std::exp(-0.5)).epsilon(1e-12));
  CHECK_THROWS_AS(ec_density(0, 1.0), ValidationError);
}

TEST_CASE("gaussian tail") {
  CHECK(gauss_tail(0.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(gauss_tail(10.0) < 1e-23);
  for (double u : {-3.0, -0.7, 0.3, 2.2, 5.5}) {
    CHECK(gauss_tail(u) + gauss_tail(-u) == doctest::Approx(1.0).epsilon(1e-14));
  }
  // Reference value Phi+(1) = 0.158655253931457051...
  CHECK(gauss_tail(1.0) == doctest::Approx(0.15865525393145705).epsilon(1e-13));
}

TEST_CASE("gaussian quantile inverts the tail") {
  for (double p : {0.5, 0.025, 0.001, 0.9, 0.4}) {
    CHECK(gauss_tail(gauss_quantile_upper(p)) == doctest::Approx(p).epsilon(1e-10));
  }
  CHECK(gauss_quantile_upper(0.025) == doctest::Approx(1.959964).epsilon(1e-6));
  CHECK_THROWS_AS(gauss_quantile_upper(0.0), ValidationError);
}

TEST_CASE("ec density orthogonality under the weighted inner product") {
  // Direct quadrature of rho_d rho_d' e^{u^2/2}; the weight cancels to a
  // polynomial times a gaussian.
  for (int d = 1; d <= 3; ++d) {
    for (int e = 1; e <= 3; ++e) {
      auto integrand = [&](double u) {
        return ec_density(d, u) * ec_density(e, u) * std::exp(0.5 * u * u);
      };
      // Romberg-style check through the projector: H_d{rho_e} must be a
      // Kronecker delta since <rho_d, rho_e>/|rho_d|^2 is exactly that.
      double proj = weighted_inner([&](double u) { return ec_density(e, u); }, d);
      CHECK(proj == doctest::Approx(d == e ? 1.0 : 0.0).epsilon(1e-8));

      // And the raw inner product against its closed-form value.
      double expect = d == e ? ec_density_norm_sq(d) : 0.0;
      double sum = 0.0;
      const int steps = 4000;
      for (int i = 0; i <= steps; ++i) {
        const double u = -9.0 + 18.0 * i / steps;
        const double w = (i == 0 || i == steps) ? 0.5 : 1.0;
        sum += w * integrand(u);
      }
      sum *= 18.0 / steps;
      CHECK(std::abs(sum - expect) <= 1e-8);
    }
  }
}

TEST_CASE("derivative identity fixed by finite differences") {
  const double h = 1e-6;
  for (int d = 1; d <= 3; ++d) {
    for (double u : {-2.7, -0.4, 0.0, 1.1, 3.3}) {
      const double fd = (ec_density(d, u + h) - ec_density(d, u - h)) / (2.0 * h);
      CHECK(std::abs(ec_density_derivative(d, u) - fd) <= 1e-6);
    }
  }
}

TEST_CASE("projector recovers lkcs from the exact pinned eec") {
  const double l1 = 13.86, l2 = 48.02;
  auto pinned = [&](double u) { return l1 * ec_density(1, u) + l2 * ec_density(2, u); };
  CHECK(weighted_inner(pinned, 1) == doctest::Approx(l1).epsilon(1e-8));
  CHECK(weighted_inner(pinned, 2) == doctest::Approx(l2).epsilon(1e-8));
}

TEST_CASE("quadrature rejects non-integrable input") {
  CHECK_THROWS_AS(weighted_inner([](double u) { return std::exp(u * u); }, 1), NumericalError);
}

TEST_CASE("pinned step projection matches quadrature") {
  auto eng = RngSeed(2718).engine();
  for (int rep = 0; rep < 10; ++rep) {
    // Random pinned step curve with base 1 ending at 0.
    const int k = 3 + static_cast<int>(eng() % 5);
    std::vector<double> crit;
    double u = -3.0;
    for (int i = 0; i < k; ++i) {
      u += 0.3 + 2.0 * (static_cast<double>(eng() >> 11) / 9007199254740992.0);
      crit.push_back(u);
    }
    std::vector<std::int64_t> deltas;
    for (;;) {
      deltas.assign(static_cast<std::size_t>(k), 0);
      std::int64_t acc = 0;
      for (int i = 0; i < k - 1; ++i) {
        std::int64_t d = static_cast<std::int64_t>(eng() % 5) - 2;
        if (d == 0) d = 1;
        deltas[static_cast<std::size_t>(i)] = d;
        acc += d;
      }
      deltas[static_cast<std::size_t>(k - 1)] = -1 - acc;
      if (deltas[static_cast<std::size_t>(k - 1)] != 0) break;
    }
    ECCurve curve(1, crit, deltas);
    StepFunction step = curve.as_step_function();

    // Independent oracle: composite Simpson on each piece where the pinned
    // curve is smooth (between breakpoints, plus the two tails).
    auto piecewise_integral = [&](int d) {
      std::vector<double> cuts = {-9.0};
      for (double c : crit) cuts.push_back(c);
      cuts.push_back(9.0);
      double total = 0.0;
      for (std::size_t piece = 0; piece + 1 < cuts.size(); ++piece) {
        const double a = cuts[piece], b = cuts[piece + 1];
        const double level = static_cast<double>(curve.evaluate(0.5 * (a + b)));
        const int steps = 2000;  // even
        double acc = 0.0;
        for (int i = 0; i <= steps; ++i) {
          const double u = a + (b - a) * i / steps;
          const double h = hermite(d - 1, u) * (level - gauss_tail(u));
          acc += (i == 0 || i == steps) ? h : (i % 2 == 1 ? 4.0 * h : 2.0 * h);
        }
        total += acc * (b - a) / (3.0 * steps);
      }
      const double twopi = 2.0 * std::numbers::pi;
      double dfact = 1.0;
      for (int q = 2; q < d; ++q) dfact *= q;
      return std::pow(twopi, 0.5 * d) / dfact * total;
    };

    for (int d = 1; d <= 2; ++d) {
      const double via_oracle = piecewise_integral(d);
      const double via_antiderivative = weighted_inner_pinned_step(step, d);
      CHECK(via_antiderivative == doctest::Approx(via_oracle).epsilon(1e-7));
    }
  }
}

TEST_CASE("basis bundle validates orders") {
  ECDensityBasis basis(2);
  CHECK(basis.density(1, 0.5) == ec_density(1, 0.5));
  CHECK(basis.hermite(3, 0.5) == hermite(3, 0.5));
  CHECK_THROWS_AS(basis.density(3, 0.0), ValidationError);
  CHECK_THROWS_AS(basis.hermite(4, 0.0), ValidationError);
  CHECK_THROWS_AS(ECDensityBasis(0), ValidationError);
}
