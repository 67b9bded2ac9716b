#include "ecstat/field_sim.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "ecstat/errors.hpp"
#include "ecstat/parallel.hpp"

namespace ecstat {

void IsotropicSpec::validate() const {
  if (L < 4) throw ValidationError("isotropic spec: L must be >= 4");
  if (!(nu > 0.0)) throw ValidationError("isotropic spec: nu must be positive");
}

void ScaleSpaceSpec::validate() const {
  if (L < 2) throw ValidationError("scale space spec: L must be >= 2");
  if (!(gamma1 > 0.0 && gamma1 < gamma2))
    throw ValidationError("scale space spec: need 0 < gamma1 < gamma2");
  if (n_t < 2 || n_gamma < 2)
    throw ValidationError("scale space spec: grid must have at least 2 points per axis");
}

namespace {

double chisq3_draw(std::mt19937_64& eng) {
  double a = normal_draw(eng), b = normal_draw(eng), c = normal_draw(eng);
  return (a * a + b * b + c * c - 3.0) / std::sqrt(6.0);
}

// Truncated Gaussian window; weights[j + radius] = exp(-j^2 / (2 nu^2)).
struct Kernel1D {
  std::int64_t radius;
  std::vector<double> w;

  explicit Kernel1D(double nu) {
    radius = static_cast<std::int64_t>(std::ceil(6.0 * nu));
    w.resize(static_cast<std::size_t>(2 * radius + 1));
    for (std::int64_t j = -radius; j <= radius; ++j) {
      w[static_cast<std::size_t>(j + radius)] =
          std::exp(-static_cast<double>(j * j) / (2.0 * nu * nu));
    }
  }
};

}  // namespace

FieldSample simulate_isotropic(const IsotropicSpec& spec, int n, const RngSeed& seed, int jobs) {
  spec.validate();
  if (n < 1) throw ValidationError("need at least one replicate");
  const std::int64_t L = spec.L;
  const Kernel1D ker(spec.nu);
  // The driving white noise lives on a lattice padded by the kernel radius,
  // so every evaluation point sees the full kernel support. Clipping the
  // noise at the domain edge would lower the gradient variance there and
  // bias the curvatures of the boundary zone.
  const std::int64_t r = ker.radius;
  const std::int64_t P = L + 2 * r;

  double sq = 0.0;  // translation-invariant per-axis sum of squared weights
  for (double w : ker.w) sq += w * w;

  std::vector<GridField> fields(static_cast<std::size_t>(n),
                                GridField(2, {L, L}, std::vector<double>(static_cast<std::size_t>(L * L), 0.0)));
  parallel_for(static_cast<std::size_t>(n), jobs, [&](std::size_t i) {
    auto eng = seed.stream("simulate", i).engine();
    std::vector<double> noise(static_cast<std::size_t>(P * P));
    for (double& v : noise) {
      v = spec.noise == Noise::gaussian ? normal_draw(eng) : chisq3_draw(eng);
    }
    // Separable convolution: second axis first, then first axis. Evaluation
    // point y corresponds to padded noise coordinates y .. y + 2r.
    std::vector<double> tmp(static_cast<std::size_t>(P * L), 0.0);
    for (std::int64_t k = 0; k < P; ++k) {
      for (std::int64_t y = 0; y < L; ++y) {
        double acc = 0.0;
        for (std::int64_t j = 0; j <= 2 * r; ++j) {
          acc += ker.w[static_cast<std::size_t>(j)] * noise[static_cast<std::size_t>(k * P + y + j)];
        }
        tmp[static_cast<std::size_t>(k * L + y)] = acc;
      }
    }
    std::vector<double> values(static_cast<std::size_t>(L * L));
    for (std::int64_t x = 0; x < L; ++x) {
      for (std::int64_t y = 0; y < L; ++y) {
        double acc = 0.0;
        for (std::int64_t j = 0; j <= 2 * r; ++j) {
          acc += ker.w[static_cast<std::size_t>(j)] * tmp[static_cast<std::size_t>((x + j) * L + y)];
        }
        values[static_cast<std::size_t>(x * L + y)] = acc / sq;
      }
    }
    fields[i] = GridField(2, {L, L}, std::move(values));
  });
  return FieldSample(std::move(fields), Provenance::raw);
}

FieldSample simulate_scale_space(const ScaleSpaceSpec& spec, int n, const RngSeed& seed,
                                 int jobs) {
  spec.validate();
  if (n < 1) throw ValidationError("need at least one replicate");
  const std::int64_t nt = spec.n_t, ng = spec.n_gamma, L = spec.L;

  std::vector<double> t(static_cast<std::size_t>(nt));
  for (std::int64_t i = 0; i < nt; ++i) {
    t[static_cast<std::size_t>(i)] =
        1.0 + static_cast<double>(L - 1) * static_cast<double>(i) / static_cast<double>(nt - 1);
  }
  std::vector<double> gamma(static_cast<std::size_t>(ng));
  for (std::int64_t j = 0; j < ng; ++j) {
    gamma[static_cast<std::size_t>(j)] =
        spec.gamma1 * std::pow(spec.gamma2 / spec.gamma1,
                               static_cast<double>(j) / static_cast<double>(ng - 1));
  }

  // White noise on integer sites padded past both ends of the t-domain by
  // the truncation radius of the widest kernel, so no row sees a clipped
  // kernel. Row (t_i, gamma_j) weights are normalized to unit l2 norm.
  const std::int64_t pad = static_cast<std::int64_t>(std::ceil(6.0 * spec.gamma2));
  const std::int64_t sites = L + 2 * pad;  // site p covers position p + 1 - pad
  std::vector<double> weights(static_cast<std::size_t>(nt * ng * sites));
  for (std::int64_t j = 0; j < ng; ++j) {
    const double g2 = gamma[static_cast<std::size_t>(j)] * gamma[static_cast<std::size_t>(j)];
    for (std::int64_t i = 0; i < nt; ++i) {
      double* w = &weights[static_cast<std::size_t>((j * nt + i) * sites)];
      double sum_sq = 0.0;
      for (std::int64_t p = 0; p < sites; ++p) {
        const double d = t[static_cast<std::size_t>(i)] - static_cast<double>(p + 1 - pad);
        w[p] = std::exp(-d * d / (2.0 * g2));
        sum_sq += w[p] * w[p];
      }
      const double inv = 1.0 / std::sqrt(sum_sq);
      for (std::int64_t p = 0; p < sites; ++p) w[p] *= inv;
    }
  }

  std::vector<GridField> fields(static_cast<std::size_t>(n),
                                GridField(2, {nt, ng}, std::vector<double>(static_cast<std::size_t>(nt * ng), 0.0)));
  parallel_for(static_cast<std::size_t>(n), jobs, [&](std::size_t r) {
    auto eng = seed.stream("simulate", r).engine();
    std::vector<double> noise(static_cast<std::size_t>(sites));
    for (double& v : noise) v = normal_draw(eng);
    std::vector<double> values(static_cast<std::size_t>(nt * ng));
    for (std::int64_t i = 0; i < nt; ++i) {
      for (std::int64_t j = 0; j < ng; ++j) {
        const double* w = &weights[static_cast<std::size_t>((j * nt + i) * sites)];
        double acc = 0.0;
        for (std::int64_t p = 0; p < sites; ++p) acc += w[p] * noise[static_cast<std::size_t>(p)];
        values[static_cast<std::size_t>(i * ng + j)] = acc;
      }
    }
    fields[r] = GridField(2, {nt, ng}, std::move(values));
  });
  return FieldSample(std::move(fields), Provenance::raw);
}

FieldSample simulate_fields(const FieldSpec& spec, int n, const RngSeed& seed, int jobs) {
  if (std::holds_alternative<IsotropicSpec>(spec))
    return simulate_isotropic(std::get<IsotropicSpec>(spec), n, seed, jobs);
  return simulate_scale_space(std::get<ScaleSpaceSpec>(spec), n, seed, jobs);
}

LKCVector true_lkc_isotropic(const IsotropicSpec& spec) {
  const double beta = 1.0 / (4.0 * spec.nu * spec.nu);
  const double len = static_cast<double>(spec.L - 1);
  LKCVector out;
  out.l0 = 1;
  out.lkc = {2.0 * std::sqrt(2.0 * beta) * len, 2.0 * beta * len * len};
  return out;
}

LKCVector true_lkc_scale_space(const ScaleSpaceSpec& spec) {
  const double len = static_cast<double>(spec.L - 1);
  const double inv1 = 1.0 / spec.gamma1, inv2 = 1.0 / spec.gamma2;
  LKCVector out;
  out.l0 = 1;
  out.lkc = {len / (2.0 * std::numbers::sqrt2) * (inv1 + inv2) +
                 std::log(spec.gamma2 / spec.gamma1) / std::numbers::sqrt2,
             0.5 * len * (inv1 - inv2)};
  return out;
}

LKCVector true_lkc(const FieldSpec& spec) {
  if (std::holds_alternative<IsotropicSpec>(spec))
    return true_lkc_isotropic(std::get<IsotropicSpec>(spec));
  return true_lkc_scale_space(std::get<ScaleSpaceSpec>(spec));
}

FieldSpec parse_field_spec(const std::string& json_text) {
  nlohmann::json j = nlohmann::json::parse(json_text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw ValidationError("field spec: malformed JSON");
  if (!j.contains("family")) throw ValidationError("field spec: missing \"family\"");
  const std::string family = j["family"].get<std::string>();
  if (family == "isotropic") {
    IsotropicSpec s;
    if (j.contains("L")) s.L = j["L"].get<std::int64_t>();
    if (j.contains("nu")) s.nu = j["nu"].get<double>();
    if (j.contains("noise")) {
      const std::string noise = j["noise"].get<std::string>();
      if (noise == "gaussian")
        s.noise = Noise::gaussian;
      else if (noise == "chisq3")
        s.noise = Noise::chisq3;
      else
        throw ValidationError("field spec: unknown noise \"" + noise + "\"");
    }
    return s;
  }
  if (family == "scalespace") {
    ScaleSpaceSpec s;
    if (j.contains("L")) s.L = j["L"].get<std::int64_t>();
    if (j.contains("gamma")) {
      auto g = j["gamma"].get<std::vector<double>>();
      if (g.size() != 2) throw ValidationError("field spec: \"gamma\" must be [g1, g2]");
      s.gamma1 = g[0];
      s.gamma2 = g[1];
    }
    if (j.contains("n_t")) s.n_t = j["n_t"].get<std::int64_t>();
    if (j.contains("n_gamma")) s.n_gamma = j["n_gamma"].get<std::int64_t>();
    return s;
  }
  throw ValidationError("field spec: unknown family \"" + family + "\"");
}

FieldSpec parse_field_spec_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_field_spec(ss.str());
}

std::string field_spec_name(const FieldSpec& spec) {
  return std::holds_alternative<IsotropicSpec>(spec) ? "isotropic" : "scalespace";
}

}  // namespace ecstat
