#include <benchmark/benchmark.h>

#include <random>

#include "klish/kmeans.hpp"
#include "klish/metrics.hpp"
#include "klish/svm.hpp"

namespace {

using namespace klish;

FeatureDataset random_data(int n, int d, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> g;
  FeatureDataset out{Matrix(n, d), std::nullopt};
  for (Eigen::Index i = 0; i < out.data.size(); ++i) out.data.data()[i] = g(gen);
  return out;
}

ClusterAssignment random_labels(int n, int k, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_int_distribution<int> u(0, k - 1);
  ClusterAssignment a{std::vector<int>(static_cast<std::size_t>(n)), k};
  for (int& l : a.labels) l = u(gen);
  return a;
}

void BM_SvmObjective(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0)), d = 64, k = static_cast<int>(state.range(1));
  const auto data = random_data(n, d, 1);
  const auto a = random_labels(n, k, 2);
  LinearClassifier c{Matrix::Random(k, d) * 0.1, Vector::Zero(k)};
  for (auto _ : state) benchmark::DoNotOptimize(svm_objective(c, data, a, 5000.0));
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_SvmObjective)->Args({10000, 10})->Args({10000, 50})->Unit(benchmark::kMillisecond);

void BM_SvmGradient(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0)), d = 64, k = static_cast<int>(state.range(1));
  const auto data = random_data(n, d, 1);
  const auto a = random_labels(n, k, 2);
  LinearClassifier c{Matrix::Random(k, d) * 0.1, Vector::Zero(k)};
  for (auto _ : state) benchmark::DoNotOptimize(svm_gradient(c, data, a, 5000.0));
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_SvmGradient)->Args({10000, 10})->Args({10000, 50})->Unit(benchmark::kMillisecond);

void BM_Lloyd(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0)), k = static_cast<int>(state.range(1));
  const auto data = random_data(n, 16, 3);
  const Matrix init = kmeanspp_seed(data, k, 4);
  KMeansOptions opts;
  opts.max_iter = 10;
  opts.tol = 0.0;
  for (auto _ : state) benchmark::DoNotOptimize(lloyd(data, init, opts));
}
BENCHMARK(BM_Lloyd)->Args({20000, 20})->Args({20000, 100})->Unit(benchmark::kMillisecond);

void BM_MiouGreedy(benchmark::State& state) {
  const int k = static_cast<int>(state.range(0)), m = 20, n = 100000;
  const auto t = metrics::contingency(random_labels(n, k, 5), random_labels(n, m, 6));
  for (auto _ : state) benchmark::DoNotOptimize(metrics::miou_greedy(t));
}
BENCHMARK(BM_MiouGreedy)->Arg(20)->Arg(100);

void BM_Ami(benchmark::State& state) {
  const int k = static_cast<int>(state.range(0)), n = 100000;
  const auto t = metrics::contingency(random_labels(n, k, 7), random_labels(n, 20, 8));
  for (auto _ : state) benchmark::DoNotOptimize(metrics::ami(t));
}
BENCHMARK(BM_Ami)->Arg(20)->Arg(100)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
