#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "ecstat/ec_curve.hpp"
#include "ecstat/grid.hpp"

using namespace ecstat;

namespace {

std::string temp_path(const std::string& name) {
  return std::string("ecstat_test_") + name;
}

std::string file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Independent 2D 4-connectivity count: vertices, axis edges, full squares.
std::int64_t brute_vef(const std::vector<std::uint8_t>& m, std::int64_t rows, std::int64_t cols) {
  auto at = [&](std::int64_t i, std::int64_t j) {
    return i >= 0 && i < rows && j >= 0 && j < cols && m[static_cast<std::size_t>(i * cols + j)];
  };
  std::int64_t v = 0, e = 0, f = 0;
  for (std::int64_t i = 0; i < rows; ++i) {
    for (std::int64_t j = 0; j < cols; ++j) {
      if (!at(i, j)) continue;
      ++v;
      if (at(i, j + 1)) ++e;
      if (at(i + 1, j)) ++e;
      if (at(i, j + 1) && at(i + 1, j) && at(i + 1, j + 1)) ++f;
    }
  }
  return v - e + f;
}

}  // namespace

TEST_CASE("grid field validates shape and finiteness") {
  CHECK_NOTHROW(GridField(2, {2, 2}, {0, 1, 2, 3}));
  CHECK_THROWS_AS(GridField(2, {2, 2}, {0, 1, 2}), ValidationError);
  CHECK_THROWS_AS(GridField(2, {2, 2}, {0, 1, 2, 3}, {1, 1, 1}), ValidationError);
  CHECK_THROWS_AS(GridField(1, {3}, {0, std::nan(""), 1}), ValidationError);
  // NaN behind the mask is allowed.
  CHECK_NOTHROW(GridField(1, {3}, {0, std::nan(""), 1}, {1, 0, 1}));
  CHECK_THROWS_AS(GridField(2, {2}, {0, 1}), ValidationError);
  CHECK_THROWS_AS(GridField(2, {2, 0}, {}), ValidationError);
}

TEST_CASE("flatten and unflatten are inverse on every index") {
  GridField f(3, {3, 4, 5}, std::vector<double>(60, 0.0));
  for (std::int64_t flat = 0; flat < f.size(); ++flat) {
    auto idx = f.unflatten(flat);
    CHECK(f.flatten(idx) == flat);
  }
  GridField g(2, {4, 7}, std::vector<double>(28, 0.0));
  CHECK(g.flatten({2, 3, 0}) == 2 * 7 + 3);
}

TEST_CASE("fldb round trip is bit exact") {
  GridField f(2, {2, 2}, {0, 1, 2, 3});
  const std::string p1 = temp_path("rt1.fldb");
  const std::string p2 = temp_path("rt2.fldb");
  save_field(f, p1);
  GridField g = load_field(p1);
  CHECK(g == f);
  CHECK(g.dim() == 2);
  CHECK(g.shape() == std::vector<std::int64_t>{2, 2});
  save_field(g, p2);
  CHECK(file_bytes(p1) == file_bytes(p2));
  std::remove(p1.c_str());
  std::remove(p2.c_str());
}

TEST_CASE("fldb preserves masks and odd values") {
  std::vector<double> values = {1.5, -0.0, 1e-308, 7.25, 99.0, -3.5};
  std::vector<std::uint8_t> mask = {1, 1, 1, 0, 1, 1};
  values[3] = std::numeric_limits<double>::quiet_NaN();  // hidden by the mask
  GridField f(2, {2, 3}, values, mask);
  const std::string p = temp_path("mask.fldb");
  save_field(f, p);
  GridField g = load_field(p);
  CHECK(g.has_mask());
  CHECK(g.mask() == mask);
  for (std::int64_t i = 0; i < g.size(); ++i) {
    if (g.inside(i)) CHECK(g.value(i) == f.value(i));
  }
  std::remove(p.c_str());
}

TEST_CASE("fldb load rejects malformed files") {
  const std::string p = temp_path("bad.fldb");

  SUBCASE("payload shorter than header claims") {
    std::ofstream out(p, std::ios::binary);
    out << R"({"dim":2,"dtype":"f64le","mask":false,"shape":[2,2]})" << '\n';
    const char zeros[24] = {};  // 3 doubles, header expects 4
    out.write(zeros, sizeof zeros);
    out.close();
    CHECK_THROWS_WITH_AS(load_field(p), doctest::Contains("length mismatch"), IoError);
  }
  SUBCASE("garbage header") {
    std::ofstream out(p, std::ios::binary);
    out << "not json\n";
    out.close();
    CHECK_THROWS_AS(load_field(p), IoError);
  }
  SUBCASE("missing keys") {
    std::ofstream out(p, std::ios::binary);
    out << R"({"dim":2})" << '\n';
    out.close();
    CHECK_THROWS_AS(load_field(p), IoError);
  }
  SUBCASE("nan inside mask names the index") {
    GridField f(1, {3}, {0, 1, 2});
    save_field(f, p);
    // Patch the middle double to NaN on disk.
    std::fstream io(p, std::ios::binary | std::ios::in | std::ios::out);
    std::string line;
    std::getline(io, line);
    io.seekp(static_cast<std::streamoff>(line.size()) + 1 + 8);
    const std::uint64_t nan_bits = 0x7ff8000000000000ULL;
    char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((nan_bits >> (8 * i)) & 0xff);
    io.write(b, 8);
    io.close();
    CHECK_THROWS_WITH_AS(load_field(p), doctest::Contains("index 1"), ValidationError);
  }
  std::remove(p.c_str());
}

TEST_CASE("save rejects unwritable paths") {
  GridField f(1, {2}, {0, 1});
  CHECK_THROWS_AS(save_field(f, "/nonexistent_dir/x.fldb"), IoError);
}

TEST_CASE("domain ec of simple masks") {
  SUBCASE("full rectangle is contractible") {
    CHECK(domain_ec(2, {50, 50}, {}, Connectivity::vertex4).l0 == 1);
    CHECK(domain_ec(3, {4, 4, 4}, {}, Connectivity::face6).l0 == 1);
    CHECK(domain_ec(1, {16}, {}, Connectivity::vertex4).l0 == 1);
  }
  SUBCASE("two disjoint blocks") {
    std::vector<std::uint8_t> mask(8 * 8, 0);
    for (std::int64_t i = 0; i < 3; ++i)
      for (std::int64_t j = 0; j < 3; ++j) mask[static_cast<std::size_t>(i * 8 + j)] = 1;
    for (std::int64_t i = 5; i < 8; ++i)
      for (std::int64_t j = 5; j < 8; ++j) mask[static_cast<std::size_t>(i * 8 + j)] = 1;
    CHECK(domain_ec(2, {8, 8}, mask, Connectivity::vertex4).l0 == 2);
    CHECK(domain_ec(2, {8, 8}, mask, Connectivity::vertex8).l0 == 2);
  }
  SUBCASE("8x8 ring has ec zero, against an independent count") {
    std::vector<std::uint8_t> mask(8 * 8, 1);
    for (std::int64_t i = 1; i < 7; ++i)
      for (std::int64_t j = 1; j < 7; ++j) mask[static_cast<std::size_t>(i * 8 + j)] = 0;
    CHECK(brute_vef(mask, 8, 8) == 0);
    CHECK(domain_ec(2, {8, 8}, mask, Connectivity::vertex4).l0 == 0);
  }
  SUBCASE("empty mask is an error") {
    std::vector<std::uint8_t> mask(4, 0);
    CHECK_THROWS_AS(domain_ec(2, {2, 2}, mask, Connectivity::vertex4), ValidationError);
  }
}

TEST_CASE("masking commutes with embedding in a larger grid") {
  std::vector<double> values = {4, 1, 7, 2, 9, 3, 5, 8, 6, 2.5, 4.5, 0.5, 1.5, 6.5, 3.5, 7.5};
  GridField small(2, {4, 4}, values);

  std::vector<double> big_values(6 * 6, 0.0);
  std::vector<std::uint8_t> big_mask(6 * 6, 0);
  for (std::int64_t i = 0; i < 4; ++i) {
    for (std::int64_t j = 0; j < 4; ++j) {
      big_values[static_cast<std::size_t>((i + 1) * 6 + (j + 1))] = values[static_cast<std::size_t>(i * 4 + j)];
      big_mask[static_cast<std::size_t>((i + 1) * 6 + (j + 1))] = 1;
    }
  }
  GridField embedded(2, {6, 6}, big_values, big_mask);

  for (Connectivity conn : {Connectivity::vertex4, Connectivity::vertex8}) {
    ECCurve a = ec_curve(small, conn);
    ECCurve b = ec_curve(embedded, conn);
    CHECK(a.l0() == b.l0());
    CHECK(a.crit_values() == b.crit_values());
    CHECK(a.deltas() == b.deltas());
  }
}

TEST_CASE("csv export writes rows along the first axis") {
  GridField f(2, {2, 3}, {1, 2, 3, 4, 5, 6});
  const std::string p = temp_path("f.csv");
  save_csv(f, p);
  std::ifstream in(p);
  std::string l1, l2;
  std::getline(in, l1);
  std::getline(in, l2);
  CHECK(l1 == "1,2,3");
  CHECK(l2 == "4,5,6");
  std::remove(p.c_str());
}
