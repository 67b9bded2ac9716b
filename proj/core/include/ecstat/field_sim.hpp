#pragma once

#include <cstdint>
#include <string>
#include <variant>

#include "ecstat/grid.hpp"
#include "ecstat/lkc.hpp"
#include "ecstat/rng.hpp"

namespace ecstat {

enum class Noise { gaussian, chisq3 };

/// Isotropic field on the [1,L]^2 integer lattice: white noise on the lattice
/// smoothed by a Gaussian kernel of bandwidth nu and normalized pointwise to
/// unit variance. Covariance approx exp(-beta |s-t|^2) with beta = 1/(4 nu^2).
struct IsotropicSpec {
  std::int64_t L = 50;
  double nu = 5.0;
  Noise noise = Noise::gaussian;

  void validate() const;
};

/// 1D scale-space field sampled on an n_t x n_gamma grid over
/// [1,L] x [gamma1, gamma2] (gamma spaced log-uniformly): white noise on the
/// integer lattice smoothed per row with bandwidth gamma, each row's kernel
/// normalized to unit l2 norm.
struct ScaleSpaceSpec {
  std::int64_t L = 50;
  double gamma1 = 4.0;
  double gamma2 = 15.0;
  std::int64_t n_t = 128;
  std::int64_t n_gamma = 32;

  void validate() const;
};

using FieldSpec = std::variant<IsotropicSpec, ScaleSpaceSpec>;

/// n independent replicates; replicate i draws from seed.stream("simulate", i)
/// so generation order and worker count do not affect the output.
FieldSample simulate_isotropic(const IsotropicSpec& spec, int n, const RngSeed& seed,
                               int jobs = 1);
FieldSample simulate_scale_space(const ScaleSpaceSpec& spec, int n, const RngSeed& seed,
                                 int jobs = 1);
FieldSample simulate_fields(const FieldSpec& spec, int n, const RngSeed& seed, int jobs = 1);

/// Closed-form LKCs of the limiting continuum fields (l0 = 1):
///   isotropic:   L1 = 2 sqrt(2 beta) (L-1),  L2 = 2 beta (L-1)^2
///   scale space: L1 = (L-1)/(2 sqrt 2) (1/g1 + 1/g2) + log(g2/g1)/sqrt 2,
///                L2 = (L-1)/2 (1/g1 - 1/g2)
LKCVector true_lkc_isotropic(const IsotropicSpec& spec);
LKCVector true_lkc_scale_space(const ScaleSpaceSpec& spec);
LKCVector true_lkc(const FieldSpec& spec);

/// Config JSON: {"family":"isotropic"|"scalespace", "L":..., "nu":...,
/// "gamma":[g1,g2], "noise":"gaussian"|"chisq3", "n_t":..., "n_gamma":...}.
FieldSpec parse_field_spec(const std::string& json_text);
FieldSpec parse_field_spec_file(const std::string& path);

std::string field_spec_name(const FieldSpec& spec);

}  // namespace ecstat
