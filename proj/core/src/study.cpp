#include "ecstat/study.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "ecstat/ec_curve.hpp"
#include "ecstat/eec.hpp"
#include "ecstat/errors.hpp"
#include "ecstat/lkc.hpp"
#include "ecstat/parallel.hpp"

namespace ecstat {

void StudyConfig::validate() const {
  if (runs < 1) throw ValidationError("study: runs must be >= 1");
  if (n_list.empty()) throw ValidationError("study: empty N list");
  for (int n : n_list) {
    if (n < 1) throw ValidationError("study: sample sizes must be >= 1");
  }
  if (estimators.empty()) throw ValidationError("study: no estimators selected");
  for (const std::string& e : estimators) {
    if (e != "hpe" && e != "bhpe" && e != "regression")
      throw ValidationError("study: unknown estimator \"" + e + "\"");
  }
  if (max_order < 1) throw ValidationError("study: max order must be >= 1");
  if (bootstrap_m < 2) throw ValidationError("study: bootstrap M must be >= 2");
}

StudyConfig parse_study_config(const std::string& json_text) {
  nlohmann::json j = nlohmann::json::parse(json_text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw ValidationError("study config: malformed JSON");
  StudyConfig c;
  if (j.contains("scenario")) {
    const std::string s = j["scenario"].get<std::string>();
    if (s == "theoretical")
      c.scenario = StudyConfig::Scenario::theoretical;
    else if (s == "experimental")
      c.scenario = StudyConfig::Scenario::experimental;
    else
      throw ValidationError("study config: unknown scenario \"" + s + "\"");
  }
  if (j.contains("estimators")) c.estimators = j["estimators"].get<std::vector<std::string>>();
  if (j.contains("field"))
    c.field = parse_field_spec(j["field"].dump());
  else
    throw ValidationError("study config: missing \"field\"");
  if (j.contains("N")) {
    if (j["N"].is_array())
      c.n_list = j["N"].get<std::vector<int>>();
    else
      c.n_list = {j["N"].get<int>()};
  }
  if (j.contains("runs")) c.runs = j["runs"].get<int>();
  if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("connectivity")) c.conn = connectivity_from_int(j["connectivity"].get<int>());
  if (j.contains("bootstrap_m")) c.bootstrap_m = j["bootstrap_m"].get<int>();
  if (j.contains("max_order")) c.max_order = j["max_order"].get<int>();
  if (j.contains("coverage_u")) c.coverage_u = j["coverage_u"].get<std::vector<double>>();
  if (j.contains("coverage_alpha")) c.coverage_alpha = j["coverage_alpha"].get<double>();
  if (j.contains("regression_levels"))
    c.regression_levels = j["regression_levels"].get<std::vector<double>>();
  if (j.contains("jobs")) c.jobs = j["jobs"].get<int>();
  c.validate();
  return c;
}

StudyConfig parse_study_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_study_config(ss.str());
}

namespace {

std::vector<double> default_levels() {
  std::vector<double> levels(40);
  for (int i = 0; i < 40; ++i) levels[static_cast<std::size_t>(i)] = -4.0 + 8.0 * i / 39.0;
  return levels;
}

struct RunResult {
  // One entry per estimator, in config order: estimated L_1..L_D.
  std::vector<std::vector<double>> lkc;
  // Per coverage level: hpe band covers truth, hpe half width, nonparametric
  // band covers truth, nonparametric half width.
  std::vector<int> cover_hpe;
  std::vector<double> halfwidth_hpe;
  std::vector<int> cover_np;
  std::vector<double> halfwidth_np;
};

}  // namespace

void run_study(const StudyConfig& config, std::ostream& out) {
  config.validate();
  const RngSeed root(config.seed);
  const int order = config.max_order;
  const std::vector<double> levels =
      config.regression_levels.empty() ? default_levels() : config.regression_levels;
  const bool experimental = config.scenario == StudyConfig::Scenario::experimental;

  const LKCVector truth = true_lkc(config.field);
  const EECModel true_model = EECModel::from_lkc(truth);

  out.precision(12);
  out << "estimator,n,run";
  for (int d = 1; d <= order; ++d) out << ",l" << d;
  for (double u : config.coverage_u) {
    out << ",cover_hpe_" << u << ",halfwidth_hpe_" << u << ",cover_np_" << u << ",halfwidth_np_"
        << u;
  }
  out << '\n';

  for (int n : config.n_list) {
    std::vector<RunResult> results(static_cast<std::size_t>(config.runs));
    parallel_for(static_cast<std::size_t>(config.runs), config.jobs, [&](std::size_t run) {
      RngSeed run_seed = root.stream("n", static_cast<std::uint64_t>(n)).stream("run", run);
      FieldSample raw = simulate_fields(config.field, n, run_seed.stream("simulate"), 1);
      // Experimental scenario: curve-based estimators get variance-one
      // residuals, the bootstrap gets the plain standardized residuals.
      const FieldSample* inputs = &raw;
      std::optional<FieldSample> unit_var;
      if (experimental) {
        unit_var = standardize_unit_variance(raw);
        inputs = &*unit_var;
      }

      std::vector<ECCurve> curves;
      curves.reserve(static_cast<std::size_t>(n));
      for (const GridField& f : inputs->fields()) curves.push_back(ec_curve(f, config.conn));

      RunResult r;
      for (const std::string& est : config.estimators) {
        if (est == "hpe") {
          LKCVector v = hpe_sample(curves, order, n >= 2);
          r.lkc.push_back(v.lkc);
        } else if (est == "bhpe") {
          FieldSample residuals = experimental ? standardize(raw) : normalize_scale_only(raw);
          BHPEResult b = bhpe(residuals, config.bootstrap_m, order, config.conn,
                              run_seed.stream("bootstrap"), 1);
          r.lkc.push_back(b.lkc.lkc);
        } else {  // regression
          StepFunction avg = ec_curve_average(curves);
          LKCVector v = lkc_regression(avg, levels, order);
          r.lkc.push_back(v.lkc);
        }
      }

      if (!config.coverage_u.empty() && n >= 2) {
        EECModel model = EECModel::from_lkc(hpe_sample(curves, order, true));
        for (double u : config.coverage_u) {
          const double truth_u = eec_evaluate(true_model, u);
          auto band = eec_band(model, u, config.coverage_alpha);
          r.cover_hpe.push_back(band[0] <= truth_u && truth_u <= band[1] ? 1 : 0);
          r.halfwidth_hpe.push_back(0.5 * (band[1] - band[0]));
          auto np = nonparametric_band(curves, u, config.coverage_alpha);
          r.cover_np.push_back(np[0] <= truth_u && truth_u <= np[1] ? 1 : 0);
          r.halfwidth_np.push_back(0.5 * (np[1] - np[0]));
        }
      }
      results[run] = std::move(r);
    });

    // Data rows in deterministic order, then per-estimator summary rows.
    for (std::size_t e = 0; e < config.estimators.size(); ++e) {
      const bool with_coverage = config.estimators[e] == "hpe" && !config.coverage_u.empty();
      for (int run = 0; run < config.runs; ++run) {
        const RunResult& r = results[static_cast<std::size_t>(run)];
        out << config.estimators[e] << ',' << n << ',' << run;
        for (double v : r.lkc[e]) out << ',' << v;
        for (std::size_t k = 0; k < config.coverage_u.size(); ++k) {
          if (with_coverage && !r.cover_hpe.empty()) {
            out << ',' << r.cover_hpe[k] << ',' << r.halfwidth_hpe[k] << ',' << r.cover_np[k]
                << ',' << r.halfwidth_np[k];
          } else {
            out << ",,,,";
          }
        }
        out << '\n';
      }

      auto column = [&](auto getter) {
        std::vector<double> xs(static_cast<std::size_t>(config.runs));
        for (int run = 0; run < config.runs; ++run)
          xs[static_cast<std::size_t>(run)] = getter(results[static_cast<std::size_t>(run)]);
        return xs;
      };
      auto emit_summary = [&](const char* tag, auto reduce) {
        out << config.estimators[e] << ',' << n << ',' << tag;
        for (int d = 0; d < order; ++d) {
          out << ',' << reduce(column([&](const RunResult& r) { return r.lkc[e][static_cast<std::size_t>(d)]; }));
        }
        for (std::size_t k = 0; k < config.coverage_u.size(); ++k) {
          if (with_coverage && config.runs > 0 && !results[0].cover_hpe.empty()) {
            out << ',' << reduce(column([&](const RunResult& r) { return static_cast<double>(r.cover_hpe[k]); }))
                << ',' << reduce(column([&](const RunResult& r) { return r.halfwidth_hpe[k]; }))
                << ',' << reduce(column([&](const RunResult& r) { return static_cast<double>(r.cover_np[k]); }))
                << ',' << reduce(column([&](const RunResult& r) { return r.halfwidth_np[k]; }));
          } else {
            out << ",,,,";
          }
        }
        out << '\n';
      };
      emit_summary("mean", [](const std::vector<double>& xs) { return pairwise_mean(xs); });
      emit_summary("sd", [](const std::vector<double>& xs) {
        const double m = pairwise_mean(xs);
        if (xs.size() < 2) return 0.0;
        std::vector<double> sq(xs.size());
        for (std::size_t i = 0; i < xs.size(); ++i) sq[i] = (xs[i] - m) * (xs[i] - m);
        return std::sqrt(pairwise_sum(sq) / static_cast<double>(xs.size() - 1));
      });
    }
  }
}

void run_study_file(const StudyConfig& config, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path);
  run_study(config, out);
}

}  // namespace ecstat
