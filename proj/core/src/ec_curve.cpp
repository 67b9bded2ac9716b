#include "ecstat/ec_curve.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include <json.hpp>

#include "ecstat/errors.hpp"

namespace ecstat {

namespace {

// ---------------------------------------------------------------------------
// Complex counting.
//
// Every cell of the complex (vertex, edge, square, cube, or simplex for the
// diagonal rules) fits inside a unit block of 2^3 grid cells and is anchored
// at its coordinate-wise minimum corner. Summing, over all block origins, a
// per-pattern contribution table therefore counts each cell exactly once:
//
//   chi = sum over origins o of g[active pattern of the block at o]
//
// where g is the subset-sum of the raw table `contrib[s] = signed count of
// anchored complex cells with vertex set exactly s`. Two tables cover all
// rules: axis-aligned boxes (vertex4 / face6 / 1D) and cliques of the full
// adjacency graph (vertex8 / full26), where every subset of a unit block is a
// simplex. Bit b of a pattern is offset (x, y, z) with b = x + 2y + 4z.
// ---------------------------------------------------------------------------

using BlockTable = std::array<std::int64_t, 256>;

constexpr int offset_x(int b) { return b & 1; }
constexpr int offset_y(int b) { return (b >> 1) & 1; }
constexpr int offset_z(int b) { return (b >> 2) & 1; }

bool anchored(unsigned s) {
  bool ax = false, ay = false, az = false;
  for (int b = 0; b < 8; ++b) {
    if (!(s & (1u << b))) continue;
    ax = ax || offset_x(b) == 0;
    ay = ay || offset_y(b) == 0;
    az = az || offset_z(b) == 0;
  }
  return ax && ay && az;
}

BlockTable subset_sum(BlockTable raw) {
  for (int bit = 0; bit < 8; ++bit) {
    for (unsigned s = 0; s < 256; ++s) {
      if (s & (1u << bit)) raw[s] += raw[s ^ (1u << bit)];
    }
  }
  return raw;
}

BlockTable make_box_table() {
  BlockTable raw{};
  // Anchored axis-aligned boxes: one per subset A of axes, sign (-1)^|A|.
  for (unsigned axes = 0; axes < 8; ++axes) {
    unsigned s = 0;
    for (int b = 0; b < 8; ++b) {
      bool in_box = ((axes & 1u) || offset_x(b) == 0) && ((axes & 2u) || offset_y(b) == 0) &&
                    ((axes & 4u) || offset_z(b) == 0);
      if (in_box) s |= 1u << b;
    }
    raw[s] += (std::popcount(axes) % 2 == 0) ? 1 : -1;
  }
  return subset_sum(raw);
}

BlockTable make_clique_table() {
  BlockTable raw{};
  // Every nonempty subset of a unit block is a simplex of the flag complex of
  // the diagonal adjacency graph; sign (-1)^(|s|-1), counted where anchored.
  for (unsigned s = 1; s < 256; ++s) {
    if (anchored(s)) raw[s] = (std::popcount(s) % 2 == 1) ? 1 : -1;
  }
  return subset_sum(raw);
}

const BlockTable& block_table(Connectivity conn) {
  static const BlockTable box = make_box_table();
  static const BlockTable clique = make_clique_table();
  return (conn == Connectivity::vertex8 || conn == Connectivity::full26) ? clique : box;
}

struct Extent3 {
  std::int64_t nx = 1, ny = 1, nz = 1;  // x = last (fastest) axis
};

Extent3 extent3(int dim, const std::vector<std::int64_t>& shape) {
  Extent3 e;
  // Row-major: last axis is contiguous; map it to x.
  e.nx = shape[static_cast<std::size_t>(dim - 1)];
  if (dim >= 2) e.ny = shape[static_cast<std::size_t>(dim - 2)];
  if (dim >= 3) e.nz = shape[static_cast<std::size_t>(dim - 3)];
  return e;
}

// 3x3(x3) neighbourhood block tables for the local scan: chi of all 512 (2D)
// or 8 (1D) patterns, precomputed once per connectivity.
std::vector<std::int64_t> make_ec3_table(int dim, Connectivity conn) {
  const int cells = dim == 1 ? 3 : (dim == 2 ? 9 : 27);
  const std::size_t patterns = std::size_t{1} << cells;
  std::vector<std::int64_t> table(patterns);
  std::vector<std::int64_t> shape(static_cast<std::size_t>(dim), 3);
  std::vector<std::uint8_t> bits(static_cast<std::size_t>(cells));
  for (std::size_t p = 0; p < patterns; ++p) {
    for (int c = 0; c < cells; ++c) bits[static_cast<std::size_t>(c)] = (p >> c) & 1u;
    table[p] = cubical_ec(bits, dim, shape, conn);
  }
  return table;
}

const std::vector<std::int64_t>& ec3_table(int dim, Connectivity conn) {
  static const std::vector<std::int64_t> t1 = make_ec3_table(1, Connectivity::vertex4);
  static const std::vector<std::int64_t> t2v4 = make_ec3_table(2, Connectivity::vertex4);
  static const std::vector<std::int64_t> t2v8 = make_ec3_table(2, Connectivity::vertex8);
  if (dim == 1) return t1;
  if (dim == 2) return conn == Connectivity::vertex8 ? t2v8 : t2v4;
  throw ValidationError("no dense local table for dim 3");
}

}  // namespace

std::int64_t cubical_ec(const std::vector<std::uint8_t>& bits, int dim,
                        const std::vector<std::int64_t>& shape, Connectivity conn) {
  check_connectivity(conn, dim);
  const BlockTable& g = block_table(conn);
  const Extent3 e = extent3(dim, shape);
  const std::int64_t sy = e.nx;          // stride of y in flats
  const std::int64_t sz = e.nx * e.ny;   // stride of z

  auto at = [&](std::int64_t x, std::int64_t y, std::int64_t z) -> unsigned {
    if (x >= e.nx || y >= e.ny || z >= e.nz) return 0u;
    return bits[static_cast<std::size_t>(z * sz + y * sy + x)] ? 1u : 0u;
  };

  std::int64_t chi = 0;
  for (std::int64_t z = 0; z < e.nz; ++z) {
    for (std::int64_t y = 0; y < e.ny; ++y) {
      for (std::int64_t x = 0; x < e.nx; ++x) {
        unsigned pattern = at(x, y, z) | (at(x + 1, y, z) << 1) | (at(x, y + 1, z) << 2) |
                           (at(x + 1, y + 1, z) << 3) | (at(x, y, z + 1) << 4) |
                           (at(x + 1, y, z + 1) << 5) | (at(x, y + 1, z + 1) << 6) |
                           (at(x + 1, y + 1, z + 1) << 7);
        chi += g[pattern];
      }
    }
  }
  return chi;
}

std::int64_t local_ec(const std::vector<std::uint8_t>& neighborhood, int dim, Connectivity conn) {
  check_connectivity(conn, dim);
  std::size_t expect = dim == 1 ? 3 : (dim == 2 ? 9 : 27);
  if (neighborhood.size() != expect)
    throw ValidationError("local_ec expects a 3^dim array, got " +
                          std::to_string(neighborhood.size()) + " cells");
  std::vector<std::int64_t> shape(static_cast<std::size_t>(dim), 3);
  return cubical_ec(neighborhood, dim, shape, conn);
}

namespace {

// Neighbourhood scan shared by ec_delta_at and ec_curve. The superlevel sweep
// follows the strict total order (value, row-major index) descending; the
// local change when the centre joins is EC(above-or-equal incl. centre) minus
// EC(strictly above), where "above" means later in the total order.
struct DeltaScanner {
  const GridField& field;
  Connectivity conn;
  int dim;
  Extent3 e;
  const std::vector<std::int64_t>* table = nullptr;  // dense tables for dim <= 2

  DeltaScanner(const GridField& f, Connectivity c) : field(f), conn(c), dim(f.dim()) {
    check_connectivity(conn, dim);
    e = extent3(dim, f.shape());
    if (dim <= 2) table = &ec3_table(dim, conn);
  }

  std::int64_t delta(std::int64_t flat) const {
    const double vc = field.value(flat);
    const std::int64_t sy = e.nx;
    const std::int64_t sz = e.nx * e.ny;
    const std::int64_t x = flat % e.nx;
    const std::int64_t y = (flat / e.nx) % e.ny;
    const std::int64_t z = flat / sz;

    const int span = dim == 1 ? 3 : (dim == 2 ? 9 : 27);
    unsigned long ge = 0, gt = 0;
    int bit = 0;
    const std::int64_t dz_max = dim >= 3 ? 1 : 0;
    const std::int64_t dy_max = dim >= 2 ? 1 : 0;
    for (std::int64_t dz = -dz_max; dz <= dz_max; ++dz) {
      for (std::int64_t dy = -dy_max; dy <= dy_max; ++dy) {
        for (std::int64_t dx = -1; dx <= 1; ++dx, ++bit) {
          const std::int64_t nx_ = x + dx, ny_ = y + dy, nz_ = z + dz;
          if (nx_ < 0 || nx_ >= e.nx || ny_ < 0 || ny_ >= e.ny || nz_ < 0 || nz_ >= e.nz)
            continue;  // -infinity padding: never active
          const std::int64_t nf = nz_ * sz + ny_ * sy + nx_;
          if (!field.inside(nf)) continue;  // masked-out: -infinity
          const double vn = field.value(nf);
          if (vn > vc || (vn == vc && nf > flat)) {
            ge |= 1ul << bit;
            gt |= 1ul << bit;
          } else if (vn == vc && nf == flat) {
            ge |= 1ul << bit;  // the centre itself
          }
        }
      }
    }
    if (table) return (*table)[ge] - (*table)[gt];
    // 3D: evaluate the two 27-cell patterns directly.
    std::vector<std::uint8_t> bits(27);
    for (int b = 0; b < span; ++b) bits[static_cast<std::size_t>(b)] = (ge >> b) & 1u;
    std::int64_t chi_ge = cubical_ec(bits, 3, {3, 3, 3}, conn);
    for (int b = 0; b < span; ++b) bits[static_cast<std::size_t>(b)] = (gt >> b) & 1u;
    std::int64_t chi_gt = cubical_ec(bits, 3, {3, 3, 3}, conn);
    return chi_ge - chi_gt;
  }
};

}  // namespace

std::int64_t ec_delta_at(const GridField& field, std::int64_t flat_index, Connectivity conn) {
  if (flat_index < 0 || flat_index >= field.size())
    throw ValidationError("index out of range");
  if (!field.inside(flat_index)) throw ValidationError("index outside the domain mask");
  return DeltaScanner(field, conn).delta(flat_index);
}

ECCurve::ECCurve(std::int64_t l0, std::vector<double> crit_values, std::vector<std::int64_t> deltas)
    : l0_(l0), crit_(std::move(crit_values)), deltas_(std::move(deltas)) {
  if (crit_.size() != deltas_.size())
    throw ValidationError("EC curve: breakpoint/delta count mismatch");
  std::int64_t sum = 0;
  for (std::size_t k = 0; k < crit_.size(); ++k) {
    if (!std::isfinite(crit_[k])) throw ValidationError("EC curve: non-finite critical value");
    if (k > 0 && !(crit_[k - 1] < crit_[k]))
      throw ValidationError("EC curve: critical values not strictly increasing");
    if (deltas_[k] == 0) throw ValidationError("EC curve: zero delta not allowed");
    sum += deltas_[k];
  }
  if (sum != -l0_)
    throw ValidationError("EC curve: deltas sum to " + std::to_string(sum) + ", expected " +
                          std::to_string(-l0_));
  cum_.resize(crit_.size() + 1);
  cum_[0] = l0_;
  for (std::size_t k = 0; k < deltas_.size(); ++k) cum_[k + 1] = cum_[k] + deltas_[k];
}

std::int64_t ECCurve::evaluate(double u) const {
  // Constant on (crit[k-1], crit[k]]: jumps apply strictly after each value.
  auto it = std::lower_bound(crit_.begin(), crit_.end(), u);
  return cum_[static_cast<std::size_t>(it - crit_.begin())];
}

StepFunction ECCurve::as_step_function() const {
  std::vector<double> deltas(deltas_.size());
  for (std::size_t k = 0; k < deltas_.size(); ++k) deltas[k] = static_cast<double>(deltas_[k]);
  return StepFunction(static_cast<double>(l0_), crit_, std::move(deltas));
}

ECCurve ec_curve(const GridField& field, Connectivity conn) {
  DomainEC dom = domain_ec(field, conn);  // rejects the empty mask
  DeltaScanner scan(field, conn);

  struct Entry {
    double value;
    std::int64_t flat;
    std::int64_t delta;
  };
  std::vector<Entry> entries;
  entries.reserve(static_cast<std::size_t>(field.size()) / 2);
  for (std::int64_t c = 0; c < field.size(); ++c) {
    if (!field.inside(c)) continue;
    std::int64_t d = scan.delta(c);
    if (d != 0) entries.push_back({field.value(c), c, d});
  }
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    return a.value < b.value || (a.value == b.value && a.flat < b.flat);
  });

  // Merge equal critical values; store the ascending-u jump, which is the
  // negative of the downward-sweep change accumulated by the scan.
  std::vector<double> crit;
  std::vector<std::int64_t> deltas;
  std::size_t i = 0;
  while (i < entries.size()) {
    std::size_t j = i;
    std::int64_t sum = 0;
    while (j < entries.size() && entries[j].value == entries[i].value) sum += entries[j++].delta;
    if (sum != 0) {
      crit.push_back(entries[i].value);
      deltas.push_back(-sum);
    }
    i = j;
  }
  return ECCurve(dom.l0, std::move(crit), std::move(deltas));
}

std::int64_t ec_oracle(const GridField& field, double u, Connectivity conn) {
  check_connectivity(conn, field.dim());
  std::vector<std::uint8_t> bits(static_cast<std::size_t>(field.size()), 0);
  for (std::int64_t i = 0; i < field.size(); ++i) {
    bits[static_cast<std::size_t>(i)] = field.inside(i) && field.value(i) >= u;
  }
  return cubical_ec(bits, field.dim(), field.shape(), conn);
}

StepFunction ec_curve_average(const std::vector<ECCurve>& curves) {
  if (curves.empty()) throw ValidationError("ec_curve_average: empty input");
  std::vector<StepFunction> steps;
  steps.reserve(curves.size());
  for (const ECCurve& c : curves) steps.push_back(c.as_step_function());
  return average_steps(steps);
}

StepFunction ec_curve_average(const FieldSample& sample, Connectivity conn) {
  std::vector<ECCurve> curves;
  curves.reserve(sample.size());
  for (const GridField& f : sample.fields()) curves.push_back(ec_curve(f, conn));
  return ec_curve_average(curves);
}

void save_ec_curve_csv(const ECCurve& curve, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path);
  out.precision(17);
  out << "u,delta,chi_after\n";
  for (std::size_t k = 0; k < curve.breakpoints(); ++k) {
    out << curve.crit_values()[k] << ',' << curve.deltas()[k] << ',' << curve.level_after(k)
        << '\n';
  }
  nlohmann::json sidecar;
  sidecar["l0"] = curve.l0();
  sidecar["m"] = curve.breakpoints();
  std::ofstream side(path + ".json", std::ios::trunc);
  if (!side) throw IoError("cannot open for writing: " + path + ".json");
  side << sidecar.dump() << '\n';
}

}  // namespace ecstat
