#include <benchmark/benchmark.h>

#include "bolt/acquisition.hpp"
#include "bolt/acquisition_function.hpp"
#include "bolt/bench.hpp"
#include "bolt/rules.hpp"

namespace {

bolt::Dataset branin_data(std::size_t n) {
  const auto p = bolt::bench::problem("branin");
  const bolt::Matrix x = p.space.sample(n, bolt::SampleMode::quasirandom, bolt::RngSeed{1});
  return bolt::bench::evaluate(p, x).at("OBJECTIVE");
}

void BM_FitGP(benchmark::State& state) {
  const auto data = branin_data(static_cast<std::size_t>(state.range(0)));
  bolt::FitConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(bolt::fit_gp(data, cfg, bolt::RngSeed{2}));
}
BENCHMARK(BM_FitGP)->Arg(10)->Arg(30)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_Predict(benchmark::State& state) {
  const auto data = branin_data(static_cast<std::size_t>(state.range(0)));
  const auto model = bolt::fit_gp(data, {}, bolt::RngSeed{2});
  const bolt::Matrix q = bolt::bench::problem("branin").space.sample(1000, bolt::SampleMode::uniform, bolt::RngSeed{3});
  for (auto _ : state) benchmark::DoNotOptimize(model.predict(q));
}
BENCHMARK(BM_Predict)->Arg(30)->Arg(100)->Unit(benchmark::kMicrosecond);

void BM_OptimizeEI(benchmark::State& state) {
  const auto p = bolt::bench::problem("branin");
  const auto data = branin_data(20);
  auto model = std::make_shared<const bolt::GPModel>(bolt::fit_gp(data, {}, bolt::RngSeed{2}));
  const bolt::ModelMap models{{"OBJECTIVE", model}};
  const bolt::TaggedDatasets tagged({{"OBJECTIVE", data}});
  const auto f = bolt::build_acquisition({}, models, tagged, bolt::RngSeed{0});
  for (auto _ : state) benchmark::DoNotOptimize(bolt::optimize_acquisition(p.space, *f, {}, bolt::RngSeed{4}));
}
BENCHMARK(BM_OptimizeEI)->Unit(benchmark::kMillisecond);

void BM_Hypervolume(benchmark::State& state) {
  bolt::Rng rng(bolt::RngSeed{5});
  bolt::Matrix obs(state.range(0), 2);
  for (Eigen::Index i = 0; i < obs.rows(); ++i) obs.row(i) << rng.uniform(), rng.uniform();
  const bolt::Vector ref = bolt::Vector::Ones(2);
  for (auto _ : state) benchmark::DoNotOptimize(bolt::acquisition::hypervolume(bolt::acquisition::pareto_front(obs, ref)));
}
BENCHMARK(BM_Hypervolume)->Arg(50)->Arg(500);

}  // namespace
BENCHMARK_MAIN();
