#include <benchmark/benchmark.h>

#include <random>

#include "vacalc/density.hpp"
#include "vacalc/estimator.hpp"
#include "vacalc/generator.hpp"
#include "vacalc/solver.hpp"

using namespace vacalc;

namespace {

Dataset labeled_fixture(int J, int K, int n, std::uint64_t seed) {
  GeneratorSpec spec = GeneratorSpec::random(J, K, n, 64, seed);
  return generate(spec, seed).first;
}

void solver_inputs(int J, int n_profiles, std::uint64_t seed, Eigen::VectorXd& Y,
                   Eigen::MatrixXd& X) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  X.resize(n_profiles, J);
  for (int i = 0; i < n_profiles; ++i)
    for (int j = 0; j < J; ++j) X(i, j) = unif(rng);
  for (int j = 0; j < J; ++j) X.col(j) /= X.col(j).sum();
  Eigen::VectorXd beta(J);
  for (int j = 0; j < J; ++j) beta(j) = unif(rng);
  beta /= beta.sum();
  Y = X * beta;
  for (int i = 0; i < n_profiles; ++i) Y(i) = std::max(0.0, Y(i) + 0.01 * (unif(rng) - 0.5));
  Y /= Y.sum();
}

void BM_SolveSimplex(benchmark::State& state) {
  const int J = static_cast<int>(state.range(0));
  Eigen::VectorXd Y;
  Eigen::MatrixXd X;
  solver_inputs(J, 200, 99, Y, X);
  ConstraintSpec spec;
  for (auto _ : state) {
    auto r = solve_simplex(Y, X, spec);
    benchmark::DoNotOptimize(r.beta);
  }
}
BENCHMARK(BM_SolveSimplex)->Arg(3)->Arg(5)->Arg(13)->Arg(20);

void BM_TabulateConditional(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Dataset d = labeled_fixture(5, 20, n, 7);
  auto subset = SymptomSubset::checked({0, 2, 4, 6, 8, 10, 12, 14}, 20);
  for (auto _ : state) {
    auto t = tabulate_conditional(d, subset, d.cause_set);
    benchmark::DoNotOptimize(t.profiles);
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_TabulateConditional)->Arg(1000)->Arg(5000)->Arg(20000);

void BM_Estimate(benchmark::State& state) {
  const int n_subsets = static_cast<int>(state.range(0));
  GeneratorSpec spec = GeneratorSpec::random(5, 20, 2000, 2000, 11);
  auto [hospital, population] = generate(spec, 11);
  EstimatorConfig cfg;
  cfg.subset_size = 8;
  cfg.n_subsets = n_subsets;
  cfg.seed = 1;
  for (auto _ : state) {
    auto r = estimate(hospital, population, cfg);
    benchmark::DoNotOptimize(r.point);
  }
}
BENCHMARK(BM_Estimate)->Arg(25)->Arg(100)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
