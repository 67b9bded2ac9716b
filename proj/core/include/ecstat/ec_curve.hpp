#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "ecstat/connectivity.hpp"
#include "ecstat/grid.hpp"
#include "ecstat/step_function.hpp"

namespace ecstat {

/// Piecewise-constant Euler characteristic curve of the superlevel sets
/// A(u) = {f >= u} of one field.
///
/// Stored as the domain EC l0, strictly increasing critical values and the
/// (nonzero, integer) change of the curve when u passes each critical value
/// from below. The curve equals l0 left of the first critical value
/// (inclusive) and 0 right of the last one; the deltas therefore sum to -l0.
class ECCurve {
 public:
  ECCurve(std::int64_t l0, std::vector<double> crit_values, std::vector<std::int64_t> deltas);

  std::int64_t evaluate(double u) const;

  std::int64_t l0() const { return l0_; }
  const std::vector<double>& crit_values() const { return crit_; }
  const std::vector<std::int64_t>& deltas() const { return deltas_; }
  std::size_t breakpoints() const { return crit_.size(); }

  /// Curve value on (crit[k-1], crit[k]]; level_after(k) on (crit[k], crit[k+1]].
  std::int64_t level_before(std::size_t k) const { return cum_[k]; }
  std::int64_t level_after(std::size_t k) const { return cum_[k + 1]; }

  StepFunction as_step_function() const;

 private:
  std::int64_t l0_;
  std::vector<double> crit_;
  std::vector<std::int64_t> deltas_;
  std::vector<std::int64_t> cum_;
};

/// Euler characteristic (V - E + F - C) of the complex induced by a binary
/// grid under the connectivity rule. `shape` has `dim` entries, row-major.
std::int64_t cubical_ec(const std::vector<std::uint8_t>& bits, int dim,
                        const std::vector<std::int64_t>& shape, Connectivity conn);

/// Euler characteristic of a binary 3^dim neighbourhood, row-major.
std::int64_t local_ec(const std::vector<std::uint8_t>& neighborhood, int dim, Connectivity conn);

/// Topology change of the superlevel filtration when the sweep level passes
/// f(index): EC of the local pattern {neighbours above the centre, centre
/// included} minus {centre excluded}. Ties between equal values are broken by
/// row-major index so the scan follows a strict total order.
std::int64_t ec_delta_at(const GridField& field, std::int64_t flat_index, Connectivity conn);

/// Exact EC curve of the field's superlevel sets via the local topology-change
/// scan: pad with -infinity, accumulate per-cell deltas, sort by (value,
/// index) and merge equal values into single breakpoints.
ECCurve ec_curve(const GridField& field, Connectivity conn);

/// Independent brute-force verifier: thresholds the field at u and counts the
/// full complex on {f >= u}. Intentionally O(grid) per threshold.
std::int64_t ec_oracle(const GridField& field, double u, Connectivity conn);

/// Pointwise mean of the sample's EC curves as an exact merged step function.
StepFunction ec_curve_average(const FieldSample& sample, Connectivity conn);
StepFunction ec_curve_average(const std::vector<ECCurve>& curves);

/// CSV export (`u,delta,chi_after`, one row per breakpoint) plus a JSON
/// sidecar `<path>.json` with {"l0":..., "m":...}.
void save_ec_curve_csv(const ECCurve& curve, const std::string& path);

}  // namespace ecstat
