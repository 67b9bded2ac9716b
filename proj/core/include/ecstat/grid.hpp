#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ecstat/connectivity.hpp"
#include "ecstat/errors.hpp"

namespace ecstat {

/// A scalar field sampled on a regular 1D/2D/3D grid with unit spacing.
///
/// Values are stored row-major (last axis fastest). An optional mask marks
/// the domain S: true = inside. Consumers treat masked-out locations as
/// -infinity, so excursion sets never touch them. All in-mask values must be
/// finite; this is validated on construction.
class GridField {
 public:
  GridField(int dim, std::vector<std::int64_t> shape, std::vector<double> values,
            std::vector<std::uint8_t> mask = {});

  int dim() const { return dim_; }
  const std::vector<std::int64_t>& shape() const { return shape_; }
  std::int64_t size() const { return static_cast<std::int64_t>(values_.size()); }
  const std::vector<double>& values() const { return values_; }
  bool has_mask() const { return !mask_.empty(); }
  const std::vector<std::uint8_t>& mask() const { return mask_; }

  double value(std::int64_t flat) const { return values_[static_cast<std::size_t>(flat)]; }
  bool inside(std::int64_t flat) const {
    return mask_.empty() || mask_[static_cast<std::size_t>(flat)] != 0;
  }

  std::int64_t flatten(const std::array<std::int64_t, 3>& idx) const;
  std::array<std::int64_t, 3> unflatten(std::int64_t flat) const;

  /// Same grid and mask, different values.
  GridField with_values(std::vector<double> values) const;

  bool same_layout(const GridField& other) const;

  friend bool operator==(const GridField&, const GridField&) = default;

 private:
  int dim_;
  std::vector<std::int64_t> shape_;
  std::vector<double> values_;
  std::vector<std::uint8_t> mask_;  // empty = full grid
};

enum class Provenance { raw, standardized_residual, bootstrap_replicate };

std::string provenance_name(Provenance p);

/// An ordered collection of fields over one shared domain.
class FieldSample {
 public:
  FieldSample(std::vector<GridField> fields, Provenance provenance);

  std::size_t size() const { return fields_.size(); }
  const GridField& field(std::size_t n) const { return fields_[n]; }
  const std::vector<GridField>& fields() const { return fields_; }
  Provenance provenance() const { return provenance_; }

  /// True when every member additionally satisfies the pointwise zero-sum
  /// half of the residual conditions (set by the producing transform).
  bool zero_mean_guaranteed() const { return zero_mean_guaranteed_; }
  void set_zero_mean_guaranteed(bool v) { zero_mean_guaranteed_ = v; }

 private:
  std::vector<GridField> fields_;
  Provenance provenance_;
  bool zero_mean_guaranteed_ = false;
};

struct DomainEC {
  std::int64_t l0 = 1;
};

/// Euler characteristic of the cubical complex induced by the mask
/// (vertices = true cells, higher cells per the connectivity rule).
DomainEC domain_ec(const GridField& field, Connectivity conn);
DomainEC domain_ec(int dim, const std::vector<std::int64_t>& shape,
                   const std::vector<std::uint8_t>& mask, Connectivity conn);

// --- FLDB file format -------------------------------------------------------
//
// Line 1: UTF-8 JSON header terminated by '\n' with keys
//   {"dim": int, "shape": [int,...], "mask": bool, "dtype": "f64le"}
// followed (when mask is true) by one 0/1 byte per cell, row-major, and then
// the values as 8-byte little-endian IEEE-754 doubles, row-major.

GridField load_field(const std::string& path);
void save_field(const GridField& field, const std::string& path);

/// Debug CSV export of a 2D field (rows = first axis).
void save_csv(const GridField& field, const std::string& path);

}  // namespace ecstat
