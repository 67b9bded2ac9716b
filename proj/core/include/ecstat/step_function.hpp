#pragma once

#include <vector>

namespace ecstat {

/// Right-open step function: value is `base` left of the first breakpoint and
/// jumps by deltas[k] when u passes crit[k] from below, i.e.
/// evaluate(u) = base + sum of deltas[k] over crit[k] < u.
/// Breakpoints are strictly increasing; the value at a breakpoint is the one
/// from the left (the curve is constant on each (crit[k-1], crit[k]]).
class StepFunction {
 public:
  StepFunction() = default;
  StepFunction(double base, std::vector<double> crit, std::vector<double> deltas);

  double evaluate(double u) const;

  double base() const { return base_; }
  const std::vector<double>& crit_values() const { return crit_; }
  const std::vector<double>& deltas() const { return deltas_; }
  std::size_t breakpoints() const { return crit_.size(); }

  /// Value on the interval ending at crit[k] (inclusive), i.e. just before the
  /// k-th jump is applied.
  double level_before(std::size_t k) const { return cum_[k]; }
  /// Value on the interval starting just after crit[k].
  double level_after(std::size_t k) const { return cum_[k + 1]; }

 private:
  double base_ = 0.0;
  std::vector<double> crit_;
  std::vector<double> deltas_;
  std::vector<double> cum_;  // cum_[k] = base + sum deltas[0..k)
};

/// Pointwise mean of step functions, exact: breakpoints are merged over the
/// union of the inputs' critical values.
StepFunction average_steps(const std::vector<StepFunction>& fs);

}  // namespace ecstat
