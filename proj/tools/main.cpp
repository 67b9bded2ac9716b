// Command-line surface for simulating random fields, computing EC curves,
// estimating LKCs and EEC curves, and solving excursion thresholds.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ecstat/ec_curve.hpp"
#include "ecstat/eec.hpp"
#include "ecstat/errors.hpp"
#include "ecstat/field_sim.hpp"
#include "ecstat/glm.hpp"
#include "ecstat/grid.hpp"
#include "ecstat/lkc.hpp"
#include "ecstat/parallel.hpp"
#include "ecstat/study.hpp"

namespace {

using namespace ecstat;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitValidation = 3;
constexpr int kExitNumerical = 4;

struct GridRange {
  double lo = -5.0, hi = 5.0, step = 0.01;
};

GridRange parse_grid(const std::string& text) {
  GridRange g;
  if (std::sscanf(text.c_str(), "%lf:%lf:%lf", &g.lo, &g.hi, &g.step) != 3 || g.step <= 0.0 ||
      g.lo > g.hi)
    throw ValidationError("grid must be lo:hi:step with positive step, got \"" + text + "\"");
  return g;
}

std::vector<double> parse_levels(const std::string& text) {
  double lo = 0, hi = 0;
  int p = 0;
  if (std::sscanf(text.c_str(), "%lf:%lf:%d", &lo, &hi, &p) != 3 || p < 1 || lo > hi)
    throw ValidationError("levels must be lo:hi:count, got \"" + text + "\"");
  std::vector<double> levels(static_cast<std::size_t>(p));
  for (int i = 0; i < p; ++i) {
    levels[static_cast<std::size_t>(i)] = p == 1 ? lo : lo + (hi - lo) * i / (p - 1);
  }
  return levels;
}

FieldSample load_inputs(const std::vector<std::string>& paths, Provenance provenance) {
  if (paths.empty()) throw ValidationError("no input fields given");
  std::vector<GridField> fields;
  fields.reserve(paths.size());
  for (const std::string& p : paths) fields.push_back(load_field(p));
  return FieldSample(std::move(fields), provenance);
}

struct EstimateOptions {
  std::vector<std::string> inputs;
  std::string estimator = "hpe";
  std::string scenario = "theoretical";
  int connectivity = 0;  // 0 = auto from dimension
  int bootstrap_m = 1000;
  std::uint64_t seed = 1;
  int max_order = 0;  // 0 = field dimension
  int jobs = 0;
  std::string levels = "-4:4:40";
};

Connectivity resolve_connectivity(int flag, int dim) {
  Connectivity c = flag == 0 ? default_connectivity(dim) : connectivity_from_int(flag);
  check_connectivity(c, dim);
  return c;
}

struct Estimated {
  LKCVector lkc;
  std::vector<ECCurve> curves;  // curves of the estimator inputs (hpe/regression)
  std::optional<std::vector<double>> bootstrap_se;
};

Estimated run_estimator(const EstimateOptions& opt) {
  FieldSample raw = load_inputs(opt.inputs, Provenance::raw);
  const int dim = raw.field(0).dim();
  const Connectivity conn = resolve_connectivity(opt.connectivity, dim);
  const int order = opt.max_order == 0 ? dim : opt.max_order;
  const bool experimental = opt.scenario == "experimental";
  if (!experimental && opt.scenario != "theoretical")
    throw ValidationError("scenario must be theoretical or experimental");

  Estimated out;
  if (opt.estimator == "bhpe") {
    FieldSample residuals = experimental ? standardize(raw) : normalize_scale_only(raw);
    BHPEResult b = bhpe(residuals, opt.bootstrap_m, order, conn, RngSeed(opt.seed), opt.jobs);
    out.lkc = std::move(b.lkc);
    out.bootstrap_se = std::move(b.se);
    return out;
  }

  // Curve-based estimators need variance-one inputs; the experimental
  // scenario therefore feeds them unit-variance residuals (the bootstrap
  // above keeps the plain standardized residuals).
  const FieldSample* inputs = &raw;
  std::optional<FieldSample> unit_var;
  if (experimental) {
    unit_var = standardize_unit_variance(raw);
    inputs = &*unit_var;
  }
  out.curves.reserve(inputs->size());
  for (const GridField& f : inputs->fields()) out.curves.push_back(ec_curve(f, conn));

  if (opt.estimator == "hpe") {
    out.lkc = hpe_sample(out.curves, order, out.curves.size() >= 2);
  } else if (opt.estimator == "regression") {
    out.lkc = lkc_regression(ec_curve_average(out.curves), parse_levels(opt.levels), order);
    out.lkc.n_used = static_cast<int>(out.curves.size());
  } else {
    throw ValidationError("estimator must be one of {hpe, bhpe, regression}");
  }
  return out;
}

// --- subcommands -------------------------------------------------------------

int cmd_simulate(const std::string& config_path, const std::string& out_dir,
                 std::optional<std::uint64_t> seed_flag, int n_flag, int jobs) {
  std::ifstream in(config_path);
  if (!in) throw IoError("cannot open config: " + config_path);
  nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw IoError("malformed config JSON: " + config_path);

  FieldSpec spec;
  try {
    spec = parse_field_spec(j.dump());
  } catch (const ValidationError& e) {
    // A config that names no known generator is a usage problem.
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  }
  int n = n_flag;
  if (n <= 0 && j.contains("n")) n = j["n"].get<int>();
  if (n <= 0) throw ValidationError("config needs a positive replicate count \"n\"");
  std::uint64_t seed = seed_flag ? *seed_flag : (j.contains("seed") ? j["seed"].get<std::uint64_t>() : 1);

  std::filesystem::create_directories(out_dir);
  FieldSample sample = simulate_fields(spec, n, RngSeed(seed).stream("simulate"), jobs);
  for (int i = 0; i < n; ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "field_%04d.fldb", i);
    const std::string tmp = (std::filesystem::path(out_dir) / (std::string(name) + ".tmp")).string();
    const std::string dst = (std::filesystem::path(out_dir) / name).string();
    save_field(sample.field(static_cast<std::size_t>(i)), tmp);
    std::filesystem::rename(tmp, dst);
  }
  std::cout << "wrote " << n << " " << field_spec_name(spec) << " fields to " << out_dir << "\n";
  return kExitOk;
}

int cmd_ec_curve(const std::string& input, const std::string& output, int connectivity) {
  GridField f = load_field(input);
  ECCurve curve = ec_curve(f, resolve_connectivity(connectivity, f.dim()));
  save_ec_curve_csv(curve, output);
  std::cout << "wrote " << curve.breakpoints() << " breakpoints to " << output << "\n";
  return kExitOk;
}

int cmd_estimate_lkc(const EstimateOptions& opt) {
  Estimated est = run_estimator(opt);
  std::optional<int> m;
  std::optional<std::uint64_t> seed;
  if (opt.estimator == "bhpe") {
    m = opt.bootstrap_m;
    seed = opt.seed;
  }
  std::cout << lkc_to_json(est.lkc, opt.estimator, m, seed,
                           est.bootstrap_se ? &*est.bootstrap_se : nullptr)
            << "\n";
  return kExitOk;
}

int cmd_estimate_eec(const EstimateOptions& opt, const std::string& grid_text, double alpha_level,
                     const std::string& curve_out) {
  Estimated est = run_estimator(opt);
  EECModel model = EECModel::from_lkc(est.lkc);
  GridRange grid = parse_grid(grid_text);
  save_eec_csv(model, grid.lo, grid.hi, grid.step, alpha_level, curve_out);

  nlohmann::json out;
  out["curve_csv"] = curve_out;
  out["fwer"] = nlohmann::json::parse(threshold_to_json(solve_threshold(model, 0.05)));
  out["cer"] = nlohmann::json::parse(threshold_to_json(solve_threshold(model, 1.0)));
  std::cout << out.dump() << "\n";
  return kExitOk;
}

int cmd_threshold(const EstimateOptions& opt, double alpha, double lo, double hi) {
  Estimated est = run_estimator(opt);
  ThresholdResult r = solve_threshold(EECModel::from_lkc(est.lkc), alpha, lo, hi);
  std::cout << threshold_to_json(r) << "\n";
  return kExitOk;
}

int cmd_study(const std::string& config_path, const std::string& out_path, int jobs) {
  StudyConfig config = parse_study_config_file(config_path);
  if (jobs > 0) config.jobs = jobs;
  if (out_path == "-") {
    run_study(config, std::cout);
  } else {
    run_study_file(config, out_path);
    std::cout << "wrote study results to " << out_path << "\n";
  }
  return kExitOk;
}

int cmd_glm_fit(const std::vector<std::string>& inputs, const std::string& design_path,
                const std::string& contrast_path, const std::string& out_dir, double smooth_sd) {
  DesignMatrix design = load_design_csv(design_path, contrast_path);
  FieldSample sample = load_inputs(inputs, Provenance::raw);
  GLMFit fit = fit_pointwise(sample, design);

  std::filesystem::create_directories(out_dir);
  const std::filesystem::path dir(out_dir);
  save_field(zscore_field(fit, design), (dir / "zscore.fldb").string());

  FieldSample residuals = fit.residuals;
  if (smooth_sd > 0.0) residuals = gaussian_smooth(residuals, smooth_sd);
  FieldSample standardized = glm_standardized_residuals(residuals);
  for (std::size_t i = 0; i < residuals.size(); ++i) {
    char name[48];
    std::snprintf(name, sizeof name, "residual_%04zu.fldb", i);
    save_field(residuals.field(i), (dir / name).string());
    std::snprintf(name, sizeof name, "std_residual_%04zu.fldb", i);
    save_field(standardized.field(i), (dir / name).string());
  }
  std::cout << "wrote z-score field and " << residuals.size() << " residual pairs to " << out_dir
            << (standardized.zero_mean_guaranteed() ? "" : " (zero-sum not guaranteed: no intercept)")
            << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Euler characteristic curves and Lipschitz-Killing curvature estimation"};
  app.require_subcommand(1);

  // simulate
  auto* sim = app.add_subcommand("simulate", "Generate random fields into FLDB files");
  std::string sim_config, sim_out = "fields";
  int sim_n = 0, sim_jobs = 0;
  std::optional<std::uint64_t> sim_seed;
  sim->add_option("--config", sim_config, "Field spec JSON")->required();
  sim->add_option("--out", sim_out, "Output directory");
  sim->add_option("--n", sim_n, "Replicates (overrides config)");
  sim->add_option("--seed", sim_seed, "Seed (overrides config)");
  sim->add_option("--jobs", sim_jobs, "Worker threads (default: all cores)");

  // ec-curve
  auto* ecc = app.add_subcommand("ec-curve", "Exact EC curve of one field as CSV");
  std::string ecc_in, ecc_out = "curve.csv";
  int ecc_conn = 0;
  ecc->add_option("input", ecc_in, "FLDB field")->required();
  ecc->add_option("--out", ecc_out, "Output CSV path");
  ecc->add_option("--connectivity", ecc_conn, "4, 8 (2D) or 6, 26 (3D)")
      ->check(CLI::IsMember({0, 4, 8, 6, 26}));

  // shared estimator options
  auto add_estimate_options = [](CLI::App* cmd, EstimateOptions& opt) {
    cmd->add_option("inputs", opt.inputs, "FLDB fields")->required();
    cmd->add_option("--estimator", opt.estimator, "hpe, bhpe or regression")
        ->check(CLI::IsMember({"hpe", "bhpe", "regression"}));
    cmd->add_option("--scenario", opt.scenario, "theoretical or experimental")
        ->check(CLI::IsMember({"theoretical", "experimental"}));
    cmd->add_option("--connectivity", opt.connectivity, "4, 8 (2D) or 6, 26 (3D)")
        ->check(CLI::IsMember({0, 4, 8, 6, 26}));
    cmd->add_option("--bootstrap-m", opt.bootstrap_m, "Bootstrap draws for the bHPE");
    cmd->add_option("--seed", opt.seed, "Bootstrap seed");
    cmd->add_option("--max-order", opt.max_order, "Curvature orders (default: dimension)");
    cmd->add_option("--levels", opt.levels, "Regression levels lo:hi:count");
    cmd->add_option("--jobs", opt.jobs, "Worker threads (default: all cores)");
  };

  auto* est = app.add_subcommand("estimate-lkc", "Estimate LKCs from observed fields");
  EstimateOptions est_opt;
  add_estimate_options(est, est_opt);

  auto* eec = app.add_subcommand("estimate-eec", "Plug-in EEC curve with bands and thresholds");
  EstimateOptions eec_opt;
  add_estimate_options(eec, eec_opt);
  std::string eec_grid = "-5:5:0.01", eec_out = "eec.csv";
  double eec_alpha = 0.05;
  eec->add_option("--grid", eec_grid, "Evaluation grid lo:hi:step");
  eec->add_option("--alpha", eec_alpha, "Pointwise band level");
  eec->add_option("--out", eec_out, "Curve CSV path");

  auto* thr = app.add_subcommand("threshold", "Solve EEC(u) = alpha for the excursion threshold");
  EstimateOptions thr_opt;
  add_estimate_options(thr, thr_opt);
  double thr_alpha = 0.05, thr_lo = 0.0, thr_hi = 8.0;
  thr->add_option("--alpha", thr_alpha, "Target EEC level (0.05 FWER, 1 CER)");
  thr->add_option("--search-lo", thr_lo, "Search interval lower end");
  thr->add_option("--search-hi", thr_hi, "Search interval upper end");

  auto* study = app.add_subcommand("study", "Monte Carlo estimator study from a JSON config");
  std::string study_config, study_out = "study.csv";
  int study_jobs = 0;
  study->add_option("--config", study_config, "Study config JSON")->required();
  study->add_option("--out", study_out, "Results CSV path (- for stdout)");
  study->add_option("--jobs", study_jobs, "Worker threads (default: all cores)");

  auto* glm = app.add_subcommand("glm-fit", "Pointwise linear model: z-score and residuals");
  std::vector<std::string> glm_inputs;
  std::string glm_design, glm_contrast, glm_out = "glm";
  double glm_smooth = 0.0;
  glm->add_option("inputs", glm_inputs, "Observed FLDB fields (one per row of the design)")
      ->required();
  glm->add_option("--design", glm_design, "Design matrix CSV")->required();
  glm->add_option("--contrast", glm_contrast, "Contrast JSON")->required();
  glm->add_option("--out", glm_out, "Output directory");
  glm->add_option("--smooth-sd", glm_smooth, "Gaussian pre-smoothing sd for residuals (0 = off)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);  // prints the message
    return kExitUsage;
  }

  try {
    if (sim->parsed()) return cmd_simulate(sim_config, sim_out, sim_seed, sim_n, sim_jobs);
    if (ecc->parsed()) return cmd_ec_curve(ecc_in, ecc_out, ecc_conn);
    if (est->parsed()) return cmd_estimate_lkc(est_opt);
    if (eec->parsed()) return cmd_estimate_eec(eec_opt, eec_grid, eec_alpha, eec_out);
    if (thr->parsed()) return cmd_threshold(thr_opt, thr_alpha, thr_lo, thr_hi);
    if (study->parsed()) return cmd_study(study_config, study_out, study_jobs);
    if (glm->parsed()) return cmd_glm_fit(glm_inputs, glm_design, glm_contrast, glm_out, glm_smooth);
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitOk;
}
