#include <benchmark/benchmark.h>

#include "variety/denoise.hpp"
#include "variety/features.hpp"
#include "variety/registration.hpp"
#include "variety/sure.hpp"
#include "variety/synth.hpp"

using namespace variety;

static void bm_feature_matrix(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const auto basis = features::build_basis(3, d);
  const PointCloud x = synth::sample_quadratic_surface_3d(1000, 1);
  for (auto _ : state) benchmark::DoNotOptimize(features::feature_matrix(x.values, basis));
  state.SetItemsProcessed(state.iterations() * x.size());
}
BENCHMARK(bm_feature_matrix)->Arg(2)->Arg(4)->Arg(6);

static void bm_residual(benchmark::State& state) {
  const auto basis = features::build_basis(2, 4);
  manifolds::Rng rng(2);
  const VarietyModel model{manifolds::random_grassmann(basis.size(), 3, rng), basis};
  const PointCloud x = synth::sample_circle(state.range(0), 3);
  for (auto _ : state) benchmark::DoNotOptimize(residual(model, x));
}
BENCHMARK(bm_residual)->Arg(150)->Arg(2000);

static void bm_denoise_circle(benchmark::State& state) {
  const PointCloud noisy = synth::add_noise(synth::sample_circle(150, 4), 1e-2, 5);
  for (auto _ : state) benchmark::DoNotOptimize(denoise(noisy));
}
BENCHMARK(bm_denoise_circle)->Unit(benchmark::kMillisecond);

static void bm_divergence(benchmark::State& state) {
  const PointCloud noisy = synth::add_noise(synth::sample_circle(150, 6), 1e-2, 7);
  const DenoiseResult r = denoise(noisy);
  for (auto _ : state) benchmark::DoNotOptimize(divergence(r.model, r.x_scaled.values, r.lambda_final));
}
BENCHMARK(bm_divergence);

static void bm_register_surface(benchmark::State& state) {
  synth::Scenario sc;
  sc.generator = synth::Generator::quadratic_surface_3d;
  sc.seed = 8;
  const synth::Pair p = synth::make_pair(sc);
  const DenoiseResult target = denoise(p.m2_hat);
  const PointCloud x1(target.scaling.apply(p.m1_hat.values));
  RegisterOptions opts;
  opts.residual_threshold = 1e-12;
  for (auto _ : state) benchmark::DoNotOptimize(register_to_variety(x1, target.model, opts));
}
BENCHMARK(bm_register_surface)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
