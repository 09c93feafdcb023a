// Serial reference kernels against their OpenMP counterparts. Parallel
// benchmarks take the thread count as their argument.

#include <benchmark/benchmark.h>
#include <omp.h>

#include "epitome/features.hpp"
#include "epitome/random.hpp"
#include "epitome/raster.hpp"
#include "epitome/synthetic.hpp"

using namespace epitome;

namespace {

Canvas sample_canvas() {
  const Dataset data = generate_synthetic_dataset();
  return dilate(rasterize(data.sketches.front(), data.sketches.front().stroke_count()));
}

struct GmmFixture {
  GmmModel gmm;
  Matrix points;
};

GmmFixture gmm_fixture() {
  Rng rng(11);
  const int K = 32, d = 64, n = 784;
  GmmFixture f;
  f.gmm.weights = Vector::Constant(K, 1.0 / K);
  f.gmm.means.resize(K, d);
  f.gmm.variances.resize(K, d);
  for (Eigen::Index i = 0; i < f.gmm.means.size(); ++i) {
    f.gmm.means.data()[i] = rng.normal();
    f.gmm.variances.data()[i] = rng.uniform(0.5, 2.0);
  }
  f.points.resize(n, d);
  for (Eigen::Index i = 0; i < f.points.size(); ++i) f.points.data()[i] = rng.normal();
  return f;
}

void thread_args(benchmark::internal::Benchmark* b) {
  for (int t = 1; t <= omp_get_max_threads(); t *= 2) b->Arg(t);
  if ((omp_get_max_threads() & (omp_get_max_threads() - 1)) != 0) b->Arg(omp_get_max_threads());
}

void BM_DilateSerial(benchmark::State& state) {
  const Canvas c = sample_canvas();
  for (auto _ : state) benchmark::DoNotOptimize(reference::dilate(c));
}

void BM_DilateParallel(benchmark::State& state) {
  const Canvas c = sample_canvas();
  omp_set_num_threads(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(dilate(c));
}

void BM_DescriptorsSerial(benchmark::State& state) {
  const Canvas c = sample_canvas();
  for (auto _ : state) benchmark::DoNotOptimize(reference::extract_descriptors(c));
}

void BM_DescriptorsParallel(benchmark::State& state) {
  const Canvas c = sample_canvas();
  omp_set_num_threads(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(extract_descriptors(c));
}

void BM_ResponsibilitiesSerial(benchmark::State& state) {
  const GmmFixture f = gmm_fixture();
  for (auto _ : state) benchmark::DoNotOptimize(reference::responsibilities(f.gmm, f.points));
}

void BM_ResponsibilitiesParallel(benchmark::State& state) {
  const GmmFixture f = gmm_fixture();
  omp_set_num_threads(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(responsibilities(f.gmm, f.points));
}

void BM_FisherSerial(benchmark::State& state) {
  const GmmFixture f = gmm_fixture();
  for (auto _ : state) benchmark::DoNotOptimize(reference::fisher_gradients(f.points, f.gmm));
}

void BM_FisherParallel(benchmark::State& state) {
  const GmmFixture f = gmm_fixture();
  omp_set_num_threads(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(fisher_gradients(f.points, f.gmm));
}

}  // namespace

BENCHMARK(BM_DilateSerial);
BENCHMARK(BM_DilateParallel)->Apply(thread_args);
BENCHMARK(BM_DescriptorsSerial);
BENCHMARK(BM_DescriptorsParallel)->Apply(thread_args);
BENCHMARK(BM_ResponsibilitiesSerial);
BENCHMARK(BM_ResponsibilitiesParallel)->Apply(thread_args);
BENCHMARK(BM_FisherSerial);
BENCHMARK(BM_FisherParallel)->Apply(thread_args);

BENCHMARK_MAIN();
