#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "ecstat/connectivity.hpp"
#include "ecstat/field_sim.hpp"

namespace ecstat {

/// Monte Carlo study over simulated fields: per run and sample size, estimate
/// LKCs with the selected estimators; optionally book-keep pointwise band
/// coverage against the known true EEC.
struct StudyConfig {
  enum class Scenario { theoretical, experimental };

  Scenario scenario = Scenario::theoretical;
  std::vector<std::string> estimators = {"hpe"};  // subset of {hpe, bhpe, regression}
  FieldSpec field = IsotropicSpec{};
  std::vector<int> n_list = {10};
  int runs = 100;
  std::uint64_t seed = 1;
  Connectivity conn = Connectivity::vertex4;
  int bootstrap_m = 1000;
  int max_order = 2;
  std::vector<double> coverage_u;  // nonempty enables coverage columns (hpe)
  double coverage_alpha = 0.05;
  std::vector<double> regression_levels;  // default: 40 equispaced in [-4, 4]
  int jobs = 0;

  void validate() const;
};

StudyConfig parse_study_config(const std::string& json_text);
StudyConfig parse_study_config_file(const std::string& path);

/// Runs the study and writes the results CSV: one data row per
/// (estimator, n, run), then per-(estimator, n) summary rows with run set to
/// "mean" and "sd". Coverage columns appear when coverage_u is nonempty.
/// Output is a deterministic function of the config.
void run_study(const StudyConfig& config, std::ostream& out);
void run_study_file(const StudyConfig& config, const std::string& path);

}  // namespace ecstat
