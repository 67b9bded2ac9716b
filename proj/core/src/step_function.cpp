#include "ecstat/step_function.hpp"

#include <algorithm>
#include <cmath>

#include "ecstat/errors.hpp"

namespace ecstat {

StepFunction::StepFunction(double base, std::vector<double> crit, std::vector<double> deltas)
    : base_(base), crit_(std::move(crit)), deltas_(std::move(deltas)) {
  if (crit_.size() != deltas_.size())
    throw ValidationError("step function: breakpoint/delta count mismatch");
  for (std::size_t k = 1; k < crit_.size(); ++k) {
    if (!(crit_[k - 1] < crit_[k]))
      throw ValidationError("step function: breakpoints not strictly increasing");
  }
  cum_.resize(crit_.size() + 1);
  cum_[0] = base_;
  for (std::size_t k = 0; k < deltas_.size(); ++k) cum_[k + 1] = cum_[k] + deltas_[k];
}

double StepFunction::evaluate(double u) const {
  auto it = std::lower_bound(crit_.begin(), crit_.end(), u);
  return cum_[static_cast<std::size_t>(it - crit_.begin())];
}

StepFunction average_steps(const std::vector<StepFunction>& fs) {
  if (fs.empty()) throw ValidationError("average_steps: empty input");
  const double inv_n = 1.0 / static_cast<double>(fs.size());

  double base = 0.0;
  std::vector<std::pair<double, double>> jumps;
  for (const StepFunction& f : fs) {
    base += f.base() * inv_n;
    for (std::size_t k = 0; k < f.breakpoints(); ++k) {
      jumps.emplace_back(f.crit_values()[k], f.deltas()[k] * inv_n);
    }
  }
  std::sort(jumps.begin(), jumps.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  std::vector<double> crit, deltas;
  std::size_t i = 0;
  while (i < jumps.size()) {
    std::size_t j = i;
    double sum = 0.0;
    while (j < jumps.size() && jumps[j].first == jumps[i].first) sum += jumps[j++].second;
    if (sum != 0.0) {
      crit.push_back(jumps[i].first);
      deltas.push_back(sum);
    }
    i = j;
  }
  return StepFunction(base, std::move(crit), std::move(deltas));
}

}  // namespace ecstat
