#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <vector>

#include "ecstat/ec_curve.hpp"
#include "ecstat/grid.hpp"
#include "ecstat/rng.hpp"

using namespace ecstat;

namespace {

GridField random_field(int dim, std::vector<std::int64_t> shape, std::mt19937_64& eng,
                       bool with_ties = false) {
  std::int64_t n = 1;
  for (auto s : shape) n *= s;
  std::vector<double> values(static_cast<std::size_t>(n));
  if (with_ties) {
    // Coarse integer levels force many exact ties.
    for (double& v : values) v = static_cast<double>(eng() % 5);
  } else {
    for (double& v : values) v = normal_draw(eng);
  }
  return GridField(dim, std::move(shape), std::move(values));
}

void check_oracle_equivalence(const GridField& f, Connectivity conn, std::mt19937_64& eng,
                              int thresholds) {
  ECCurve curve = ec_curve(f, conn);
  const auto [mn, mx] = std::minmax_element(f.values().begin(), f.values().end());
  for (int t = 0; t < thresholds; ++t) {
    const double span = *mx - *mn;
    const double u = *mn - 0.1 * span + (1.2 * span) * (static_cast<double>(eng() >> 11) / 9007199254740992.0);
    CHECK(curve.evaluate(u) == ec_oracle(f, u, conn));
  }
  // Exactly at every critical value and slightly past it.
  for (double c : curve.crit_values()) {
    CHECK(curve.evaluate(c) == ec_oracle(f, c, conn));
    CHECK(curve.evaluate(std::nextafter(c, 1e300)) ==
          ec_oracle(f, std::nextafter(c, 1e300), conn));
  }
}

}  // namespace

TEST_CASE("local ec on hand-checked patterns") {
  SUBCASE("empty and singleton") {
    CHECK(local_ec(std::vector<std::uint8_t>(9, 0), 2, Connectivity::vertex4) == 0);
    std::vector<std::uint8_t> center(9, 0);
    center[4] = 1;
    CHECK(local_ec(center, 2, Connectivity::vertex4) == 1);
    CHECK(local_ec(center, 2, Connectivity::vertex8) == 1);
  }
  SUBCASE("full 3x3 block: V=9, E=12, F=4") {
    CHECK(local_ec(std::vector<std::uint8_t>(9, 1), 2, Connectivity::vertex4) == 9 - 12 + 4);
  }
  SUBCASE("checkerboard corners under both 2d rules") {
    // corners + centre: isolated under 4-connectivity, a star under 8.
    std::vector<std::uint8_t> pat = {1, 0, 1, 0, 1, 0, 1, 0, 1};
    CHECK(local_ec(pat, 2, Connectivity::vertex4) == 5);
    CHECK(local_ec(pat, 2, Connectivity::vertex8) == 1);
  }
  SUBCASE("1d segment") {
    CHECK(local_ec({1, 1, 1}, 1, Connectivity::vertex4) == 1);
    CHECK(local_ec({1, 0, 1}, 1, Connectivity::vertex4) == 2);
  }
  SUBCASE("3d cube and shell") {
    CHECK(local_ec(std::vector<std::uint8_t>(27, 1), 3, Connectivity::face6) == 1);
    CHECK(local_ec(std::vector<std::uint8_t>(27, 1), 3, Connectivity::full26) == 1);
    std::vector<std::uint8_t> shell(27, 1);
    shell[13] = 0;  // hollow centre: a topological sphere, chi = 2
    CHECK(local_ec(shell, 3, Connectivity::face6) == 2);
  }
  SUBCASE("wrong size is rejected") {
    CHECK_THROWS_AS(local_ec({1, 1}, 2, Connectivity::vertex4), ValidationError);
  }
}

TEST_CASE("ec delta at hand-checked configurations") {
  // 3x3 fields with the centre as the interesting point.
  SUBCASE("interior local maximum appears as a new component") {
    GridField f(2, {3, 3}, {1, 2, 1, 2, 9, 2, 1, 2, 1});
    CHECK(ec_delta_at(f, 4, Connectivity::vertex4) == 1);
  }
  SUBCASE("saddle joining two arcs") {
    // Strictly larger neighbours above and below, everything else smaller.
    GridField f(2, {3, 3}, {1, 8, 1, 2, 5, 2, 1, 9, 1});
    CHECK(ec_delta_at(f, 4, Connectivity::vertex4) == -1);
  }
  SUBCASE("regular point on a slope") {
    GridField f(2, {3, 3}, {1, 8, 1, 2, 5, 2, 1, 2, 1});
    CHECK(ec_delta_at(f, 4, Connectivity::vertex4) == 0);
  }
  SUBCASE("outside the mask is an error") {
    GridField f(2, {3, 3}, std::vector<double>(9, 0.0),
                {1, 1, 1, 1, 0, 1, 1, 1, 1});
    CHECK_THROWS_AS(ec_delta_at(f, 4, Connectivity::vertex4), ValidationError);
    CHECK_THROWS_AS(ec_delta_at(f, 99, Connectivity::vertex4), ValidationError);
  }
}

TEST_CASE("ec curve of the 1d example field") {
  GridField f(1, {4}, {1, 3, 2, 4});
  ECCurve c = ec_curve(f, Connectivity::vertex4);
  CHECK(c.l0() == 1);
  CHECK(c.evaluate(0.5) == 1);
  CHECK(c.evaluate(1.5) == 1);
  CHECK(c.evaluate(2.5) == 2);
  CHECK(c.evaluate(3.5) == 1);
  CHECK(c.evaluate(4.5) == 0);
  // The value 1 is a zero-change point and must not appear as a breakpoint.
  CHECK(c.crit_values() == std::vector<double>{2, 3, 4});
}

TEST_CASE("ec curve of a constant field is a single jump") {
  GridField f(2, {5, 5}, std::vector<double>(25, 3.25));
  ECCurve c = ec_curve(f, Connectivity::vertex4);
  CHECK(c.breakpoints() == 1);
  CHECK(c.crit_values()[0] == 3.25);
  CHECK(c.evaluate(3.25) == 1);
  CHECK(c.evaluate(std::nextafter(3.25, 10.0)) == 0);
  CHECK(c.evaluate(-100.0) == 1);
}

TEST_CASE("ec curve rejects an empty mask") {
  CHECK_THROWS_AS(
      ec_curve(GridField(2, {2, 2}, {0, 0, 0, 0}, {0, 0, 0, 0}), Connectivity::vertex4),
      ValidationError);
}

TEST_CASE("oracle equivalence over random fields") {
  auto eng = RngSeed(20240811).engine();
  struct Case {
    int dim;
    std::vector<std::int64_t> shape;
    std::vector<Connectivity> conns;
  };
  const std::vector<Case> cases = {
      {1, {16}, {Connectivity::vertex4}},
      {2, {8, 8}, {Connectivity::vertex4, Connectivity::vertex8}},
      {2, {16, 16}, {Connectivity::vertex4, Connectivity::vertex8}},
      {3, {4, 4, 4}, {Connectivity::face6, Connectivity::full26}},
  };
  for (const Case& c : cases) {
    for (int rep = 0; rep < 6; ++rep) {
      GridField f = random_field(c.dim, c.shape, eng);
      for (Connectivity conn : c.conns) check_oracle_equivalence(f, conn, eng, 25);
    }
  }
}

TEST_CASE("oracle equivalence with heavy ties") {
  auto eng = RngSeed(7).engine();
  for (int rep = 0; rep < 8; ++rep) {
    GridField f = random_field(2, {8, 8}, eng, true);
    check_oracle_equivalence(f, Connectivity::vertex4, eng, 30);
    check_oracle_equivalence(f, Connectivity::vertex8, eng, 30);
  }
  for (int rep = 0; rep < 4; ++rep) {
    GridField f = random_field(3, {4, 4, 4}, eng, true);
    check_oracle_equivalence(f, Connectivity::face6, eng, 20);
    check_oracle_equivalence(f, Connectivity::full26, eng, 20);
  }
}

TEST_CASE("oracle equivalence with a masked domain") {
  auto eng = RngSeed(99).engine();
  std::vector<std::uint8_t> mask(12 * 12, 1);
  for (std::int64_t i = 4; i < 8; ++i)
    for (std::int64_t j = 4; j < 8; ++j) mask[static_cast<std::size_t>(i * 12 + j)] = 0;
  for (int rep = 0; rep < 5; ++rep) {
    std::vector<double> values(144);
    for (double& v : values) v = normal_draw(eng);
    GridField f(2, {12, 12}, values, mask);
    check_oracle_equivalence(f, Connectivity::vertex4, eng, 30);
    check_oracle_equivalence(f, Connectivity::vertex8, eng, 30);
  }
}

TEST_CASE("duplicated values at separated locations stay oracle-exact") {
  auto eng = RngSeed(1234).engine();
  std::vector<double> values(64);
  for (double& v : values) v = normal_draw(eng);
  values[3] = values[60];  // exact tie far apart
  values[10] = values[45];
  GridField f(2, {8, 8}, values);
  check_oracle_equivalence(f, Connectivity::vertex4, eng, 50);
}

TEST_CASE("telescoping and pinned limits") {
  auto eng = RngSeed(5).engine();
  for (int rep = 0; rep < 5; ++rep) {
    GridField f = random_field(2, {10, 10}, eng);
    ECCurve c = ec_curve(f, Connectivity::vertex4);
    std::int64_t sum = 0;
    for (auto d : c.deltas()) {
      CHECK(d != 0);
      sum += d;
    }
    CHECK(sum == -c.l0());
    CHECK(c.evaluate(-1e308) == c.l0());
    CHECK(c.evaluate(1e308) == 0);
  }
}

TEST_CASE("monotone relabeling maps breakpoints and keeps deltas") {
  auto eng = RngSeed(17).engine();
  GridField f = random_field(2, {9, 9}, eng);
  auto g = [](double u) { return u * u * u + 2.0 * u; };  // strictly increasing
  std::vector<double> mapped(f.values().size());
  for (std::size_t i = 0; i < mapped.size(); ++i) mapped[i] = g(f.values()[i]);
  ECCurve a = ec_curve(f, Connectivity::vertex4);
  ECCurve b = ec_curve(f.with_values(mapped), Connectivity::vertex4);
  REQUIRE(a.breakpoints() == b.breakpoints());
  CHECK(a.deltas() == b.deltas());
  for (std::size_t k = 0; k < a.breakpoints(); ++k) {
    CHECK(b.crit_values()[k] == doctest::Approx(g(a.crit_values()[k])).epsilon(1e-12));
  }
}

TEST_CASE("ec curve average") {
  SUBCASE("single curve averages to itself") {
    GridField f(1, {4}, {1, 3, 2, 4});
    ECCurve c = ec_curve(f, Connectivity::vertex4);
    StepFunction avg = ec_curve_average({c});
    for (double u : {-1.0, 1.5, 2.5, 3.5, 10.0}) {
      CHECK(avg.evaluate(u) == doctest::Approx(static_cast<double>(c.evaluate(u))));
    }
  }
  SUBCASE("two shifted jumps average to two half jumps") {
    ECCurve a(1, {0.0, 5.0}, {1, -2});
    ECCurve b(1, {1.0, 5.0}, {1, -2});
    StepFunction avg = ec_curve_average({a, b});
    CHECK(avg.evaluate(-1.0) == doctest::Approx(1.0));
    CHECK(avg.evaluate(0.5) == doctest::Approx(1.5));
    CHECK(avg.evaluate(1.5) == doctest::Approx(2.0));
    CHECK(avg.evaluate(6.0) == doctest::Approx(0.0));
  }
  SUBCASE("pinned limits for a simulated batch") {
    auto eng = RngSeed(3).engine();
    std::vector<GridField> fields;
    for (int i = 0; i < 10; ++i) fields.push_back(random_field(2, {8, 8}, eng));
    FieldSample sample(std::move(fields), Provenance::raw);
    StepFunction avg = ec_curve_average(sample, Connectivity::vertex4);
    CHECK(avg.evaluate(-10.0) == doctest::Approx(1.0));
    CHECK(avg.evaluate(10.0) == doctest::Approx(0.0));
  }
}

TEST_CASE("ec curve constructor rejects broken invariants") {
  CHECK_THROWS_AS(ECCurve(1, {1.0, 1.0}, {1, -2}), ValidationError);  // not increasing
  CHECK_THROWS_AS(ECCurve(1, {1.0, 2.0}, {0, -1}), ValidationError);  // zero delta
  CHECK_THROWS_AS(ECCurve(1, {1.0}, {1}), ValidationError);           // wrong total
}

TEST_CASE("ec curve csv export") {
  GridField f(1, {4}, {1, 3, 2, 4});
  ECCurve c = ec_curve(f, Connectivity::vertex4);
  const std::string p = "ecstat_test_curve.csv";
  save_ec_curve_csv(c, p);
  std::ifstream in(p);
  std::string header;
  std::getline(in, header);
  CHECK(header == "u,delta,chi_after");
  int rows = 0;
  for (std::string line; std::getline(in, line);) ++rows;
  CHECK(rows == 3);
  std::ifstream side(p + ".json");
  std::string sidecar;
  std::getline(side, sidecar);
  CHECK(sidecar.find("\"l0\":1") != std::string::npos);
  CHECK(sidecar.find("\"m\":3") != std::string::npos);
  std::remove(p.c_str());
  std::remove((p + ".json").c_str());
}
