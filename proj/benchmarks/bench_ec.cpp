#include <benchmark/benchmark.h>

#include "ecstat/ec_curve.hpp"
#include "ecstat/eec.hpp"
#include "ecstat/field_sim.hpp"
#include "ecstat/hermite.hpp"
#include "ecstat/lkc.hpp"
#include "ecstat/rng.hpp"

using namespace ecstat;

namespace {

GridField make_field(std::int64_t side, std::uint64_t seed = 31) {
  auto eng = RngSeed(seed).engine();
  std::vector<double> values(static_cast<std::size_t>(side * side));
  for (double& v : values) v = normal_draw(eng);
  return GridField(2, {side, side}, std::move(values));
}

GridField make_field_3d(std::int64_t side) {
  auto eng = RngSeed(32).engine();
  std::vector<double> values(static_cast<std::size_t>(side * side * side));
  for (double& v : values) v = normal_draw(eng);
  return GridField(3, {side, side, side}, std::move(values));
}

void bm_ec_curve_2d(benchmark::State& state) {
  GridField f = make_field(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(ec_curve(f, Connectivity::vertex4));
  }
  state.SetItemsProcessed(state.iterations() * f.size());
}
BENCHMARK(bm_ec_curve_2d)->Arg(32)->Arg(64)->Arg(128)->Arg(256);

void bm_ec_curve_3d(benchmark::State& state) {
  GridField f = make_field_3d(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(ec_curve(f, Connectivity::face6));
  }
  state.SetItemsProcessed(state.iterations() * f.size());
}
BENCHMARK(bm_ec_curve_3d)->Arg(8)->Arg(16)->Arg(32);

void bm_ec_oracle_sweep(benchmark::State& state) {
  GridField f = make_field(state.range(0));
  for (auto _ : state) {
    for (double u = -3.0; u <= 3.0; u += 0.5) {
      benchmark::DoNotOptimize(ec_oracle(f, u, Connectivity::vertex4));
    }
  }
}
BENCHMARK(bm_ec_oracle_sweep)->Arg(32)->Arg(64);

void bm_hpe_single(benchmark::State& state) {
  ECCurve curve = ec_curve(make_field(64), Connectivity::vertex4);
  for (auto _ : state) {
    benchmark::DoNotOptimize(hpe_single(curve, 2));
  }
}
BENCHMARK(bm_hpe_single);

void bm_simulate_isotropic(benchmark::State& state) {
  IsotropicSpec spec{state.range(0), 5.0, Noise::gaussian};
  std::uint64_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(simulate_isotropic(spec, 1, RngSeed(7).stream(i++), 1));
  }
}
BENCHMARK(bm_simulate_isotropic)->Arg(50)->Arg(100);

void bm_gmf_draw(benchmark::State& state) {
  std::vector<GridField> fields;
  for (int i = 0; i < 50; ++i) fields.push_back(make_field(50, 100 + static_cast<std::uint64_t>(i)));
  FieldSample res = standardize(FieldSample(std::move(fields), Provenance::raw));
  auto draw_eng = RngSeed(10).engine();
  for (auto _ : state) {
    benchmark::DoNotOptimize(gmf_draw(res, draw_eng));
  }
}
BENCHMARK(bm_gmf_draw);

void bm_bootstrap_replicate(benchmark::State& state) {
  std::vector<GridField> fields;
  for (int i = 0; i < 50; ++i) fields.push_back(make_field(50, 200 + static_cast<std::uint64_t>(i)));
  FieldSample res = standardize(FieldSample(std::move(fields), Provenance::raw));
  auto eng = RngSeed(11).engine();
  for (auto _ : state) {
    GridField g = gmf_draw(res, eng);
    benchmark::DoNotOptimize(hpe_single(ec_curve(g, Connectivity::vertex4), 2));
  }
}
BENCHMARK(bm_bootstrap_replicate);

void bm_weighted_inner_quadrature(benchmark::State& state) {
  auto pinned = [](double u) { return 13.86 * ec_density(1, u) + 48.02 * ec_density(2, u); };
  for (auto _ : state) {
    benchmark::DoNotOptimize(weighted_inner(pinned, 2));
  }
}
BENCHMARK(bm_weighted_inner_quadrature);

void bm_solve_threshold(benchmark::State& state) {
  LKCVector v;
  v.l0 = 1;
  v.lkc = {13.86, 48.02};
  EECModel model = EECModel::from_lkc(v);
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_threshold(model, 0.05));
  }
}
BENCHMARK(bm_solve_threshold);

}  // namespace

BENCHMARK_MAIN();
