#include <memory>
#include <vector>

#include <benchmark/benchmark.h>

#include "pdmp/pdmp.hpp"

namespace {

using namespace pdmp;

std::shared_ptr<const EmbeddedChain> tcp_chain(std::size_t n) {
  static std::shared_ptr<const EmbeddedChain> cached;
  if (!cached || cached->size() < n) {
    cached = std::make_shared<const EmbeddedChain>(
        simulate_chain(build_tcp(), State{0.5, 0.5}, n, StreamFactory(1).stream(1)));
  }
  return std::make_shared<const EmbeddedChain>(chain_slice(*cached, 0, n));
}

void BM_SimulateTcp(benchmark::State& state) {
  const PdmpModel tcp = build_tcp();
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(simulate_chain(tcp, State{0.5, 0.5}, n, CounterRng(7)));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SimulateTcp)->Arg(1000)->Arg(10000);

void BM_StreamingUpdate(benchmark::State& state) {
  const auto chain = tcp_chain(10000);
  std::vector<QueryPoint> queries;
  for (int j = 0; j < state.range(0); ++j) queries.push_back({State{0.05 + 0.01 * j, 0.5}, 0.1});
  for (auto _ : state) {
    StreamingEstimator est({1.0, 1.0, 0.2, 0.3, 2}, KernelPair::epanechnikov(2), queries);
    est.accumulate(*chain);
    benchmark::DoNotOptimize(est.eval_raw(std::size_t{0}));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(chain->size()));
}
BENCHMARK(BM_StreamingUpdate)->Arg(1)->Arg(75);

void BM_BatchQuery(benchmark::State& state) {
  const auto chain = tcp_chain(static_cast<std::size_t>(state.range(0)));
  const BatchEstimator est(make_chain_index(chain, 0.3), {0.3, 0.3, 0.2, 0.3, 2},
                           KernelPair::epanechnikov(2));
  const QueryPoint q{State{0.55, 0.5}, 0.2};
  for (auto _ : state) benchmark::DoNotOptimize(est.eval_raw(q));
}
BENCHMARK(BM_BatchQuery)->Arg(10000)->Arg(100000);

void BM_SurvivalCrossValidation(benchmark::State& state) {
  const PdmpModel tcp = build_tcp();
  const auto main = tcp_chain(10000);
  const auto val = std::make_shared<const EmbeddedChain>(
      simulate_chain(tcp, State{0.5, 0.5}, 1000, StreamFactory(1).stream(2)));
  const State x{0.75, 0.5};
  const ReverseCurve curve = reverse_curve(tcp, x, 0.0075, kInfinity);
  const CvProblem problem = make_cv_problem(tcp, make_chain_index(main, 1.0), val, curve, 0.01,
                                            KernelPair::epanechnikov(2), 1.0, 1.0);
  const std::vector<double> grid = default_exponent_grid();
  for (auto _ : state) benchmark::DoNotOptimize(choose_alpha_G(problem, grid));
}
BENCHMARK(BM_SurvivalCrossValidation)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
