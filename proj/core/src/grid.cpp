#include "ecstat/grid.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "ecstat/ec_curve.hpp"

namespace ecstat {

GridField::GridField(int dim, std::vector<std::int64_t> shape, std::vector<double> values,
                     std::vector<std::uint8_t> mask)
    : dim_(dim), shape_(std::move(shape)), values_(std::move(values)), mask_(std::move(mask)) {
  if (dim_ < 1 || dim_ > 3) throw ValidationError("grid dim must be 1, 2 or 3");
  if (static_cast<int>(shape_.size()) != dim_)
    throw ValidationError("shape has " + std::to_string(shape_.size()) + " entries, expected " +
                          std::to_string(dim_));
  std::int64_t n = 1;
  for (std::int64_t s : shape_) {
    if (s <= 0) throw ValidationError("shape entries must be positive");
    n *= s;
  }
  if (static_cast<std::int64_t>(values_.size()) != n)
    throw ValidationError("values length " + std::to_string(values_.size()) +
                          " does not match shape product " + std::to_string(n));
  if (!mask_.empty() && static_cast<std::int64_t>(mask_.size()) != n)
    throw ValidationError("mask length " + std::to_string(mask_.size()) +
                          " does not match shape product " + std::to_string(n));
  for (std::int64_t i = 0; i < n; ++i) {
    if (inside(i) && !std::isfinite(values_[static_cast<std::size_t>(i)]))
      throw ValidationError("non-finite value inside mask at flat index " + std::to_string(i));
  }
}

std::int64_t GridField::flatten(const std::array<std::int64_t, 3>& idx) const {
  std::int64_t flat = 0;
  for (int a = 0; a < dim_; ++a) flat = flat * shape_[static_cast<std::size_t>(a)] + idx[static_cast<std::size_t>(a)];
  return flat;
}

std::array<std::int64_t, 3> GridField::unflatten(std::int64_t flat) const {
  std::array<std::int64_t, 3> idx{0, 0, 0};
  for (int a = dim_ - 1; a >= 0; --a) {
    idx[static_cast<std::size_t>(a)] = flat % shape_[static_cast<std::size_t>(a)];
    flat /= shape_[static_cast<std::size_t>(a)];
  }
  return idx;
}

GridField GridField::with_values(std::vector<double> values) const {
  return GridField(dim_, shape_, std::move(values), mask_);
}

bool GridField::same_layout(const GridField& other) const {
  return dim_ == other.dim_ && shape_ == other.shape_ && mask_ == other.mask_;
}

std::string provenance_name(Provenance p) {
  switch (p) {
    case Provenance::raw: return "raw";
    case Provenance::standardized_residual: return "standardized_residual";
    case Provenance::bootstrap_replicate: return "bootstrap_replicate";
  }
  return "raw";
}

FieldSample::FieldSample(std::vector<GridField> fields, Provenance provenance)
    : fields_(std::move(fields)), provenance_(provenance) {
  if (fields_.empty()) throw ValidationError("field sample must contain at least one field");
  for (std::size_t n = 1; n < fields_.size(); ++n) {
    if (!fields_[n].same_layout(fields_[0]))
      throw ValidationError("field " + std::to_string(n) + " does not share the sample's grid layout");
  }
}

DomainEC domain_ec(int dim, const std::vector<std::int64_t>& shape,
                   const std::vector<std::uint8_t>& mask, Connectivity conn) {
  check_connectivity(conn, dim);
  std::int64_t n = 1;
  for (std::int64_t s : shape) n *= s;
  std::vector<std::uint8_t> bits = mask;
  if (bits.empty()) bits.assign(static_cast<std::size_t>(n), 1);
  bool any = false;
  for (std::uint8_t b : bits) any = any || b != 0;
  if (!any) throw ValidationError("domain mask is empty (all false)");
  return DomainEC{cubical_ec(bits, dim, shape, conn)};
}

DomainEC domain_ec(const GridField& field, Connectivity conn) {
  return domain_ec(field.dim(), field.shape(), field.mask(), conn);
}

// --- FLDB -------------------------------------------------------------------

namespace {

void write_f64le(std::ostream& out, double x) {
  auto u = std::bit_cast<std::uint64_t>(x);
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((u >> (8 * i)) & 0xff);
  out.write(b, 8);
}

double read_f64le(std::istream& in) {
  char b[8];
  in.read(b, 8);
  std::uint64_t u = 0;
  for (int i = 0; i < 8; ++i) u |= static_cast<std::uint64_t>(static_cast<unsigned char>(b[i])) << (8 * i);
  return std::bit_cast<double>(u);
}

}  // namespace

void save_field(const GridField& field, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path);
  nlohmann::json header;
  header["dim"] = field.dim();
  header["shape"] = field.shape();
  header["mask"] = field.has_mask();
  header["dtype"] = "f64le";
  out << header.dump() << '\n';
  if (field.has_mask()) {
    for (std::uint8_t m : field.mask()) out.put(m ? '\x01' : '\x00');
  }
  for (double v : field.values()) write_f64le(out, v);
  if (!out) throw IoError("write failed: " + path);
}

GridField load_field(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path);
  std::string line;
  if (!std::getline(in, line)) throw IoError("missing FLDB header line: " + path);
  nlohmann::json header = nlohmann::json::parse(line, nullptr, false);
  if (header.is_discarded() || !header.is_object())
    throw IoError("malformed FLDB header in " + path);
  if (!header.contains("dim") || !header.contains("shape") || !header.contains("mask") ||
      !header.contains("dtype"))
    throw IoError("FLDB header missing required keys in " + path);
  if (header["dtype"] != "f64le") throw IoError("unsupported dtype in " + path);

  int dim = header["dim"].get<int>();
  std::vector<std::int64_t> shape = header["shape"].get<std::vector<std::int64_t>>();
  if (dim < 1 || dim > 3 || static_cast<int>(shape.size()) != dim)
    throw IoError("inconsistent dim/shape in FLDB header of " + path);
  std::int64_t n = 1;
  for (std::int64_t s : shape) {
    if (s <= 0) throw IoError("non-positive shape entry in " + path);
    n *= s;
  }

  std::vector<std::uint8_t> mask;
  if (header["mask"].get<bool>()) {
    mask.resize(static_cast<std::size_t>(n));
    in.read(reinterpret_cast<char*>(mask.data()), n);
    if (in.gcount() != n) throw IoError("mask payload length mismatch in " + path);
    for (std::uint8_t& m : mask) {
      if (m > 1) throw IoError("mask byte out of {0,1} in " + path);
    }
  }

  std::vector<double> values(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) {
    values[static_cast<std::size_t>(i)] = read_f64le(in);
    if (!in) throw IoError("values payload length mismatch in " + path + ": expected " +
                           std::to_string(n) + " doubles, got " + std::to_string(i));
  }
  if (in.get() != std::ifstream::traits_type::eof())
    throw IoError("trailing bytes after values payload in " + path);

  try {
    return GridField(dim, std::move(shape), std::move(values), std::move(mask));
  } catch (const ValidationError& e) {
    throw ValidationError(std::string(e.what()) + " (while loading " + path + ")");
  }
}

void save_csv(const GridField& field, const std::string& path) {
  if (field.dim() != 2) throw ValidationError("CSV export supports 2D fields only");
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path);
  out.precision(17);
  const std::int64_t rows = field.shape()[0];
  const std::int64_t cols = field.shape()[1];
  for (std::int64_t i = 0; i < rows; ++i) {
    for (std::int64_t j = 0; j < cols; ++j) {
      if (j) out << ',';
      out << field.value(i * cols + j);
    }
    out << '\n';
  }
}

}  // namespace ecstat
