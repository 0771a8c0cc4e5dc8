#include "fixtures.hpp"
#include "qtps/annealer.hpp"
#include "qtps/manifold.hpp"
#include "qtps/qubo.hpp"

#include <benchmark/benchmark.h>

using namespace qtps;

namespace {

TransitionGraph grid_graph(std::size_t side) {
  std::vector<EdgePair> edges;
  std::vector<double> w;
  RandomStream rng(1);
  auto id = [side](std::size_t r, std::size_t c) { return r * side + c; };
  for (std::size_t r = 0; r < side; ++r) {
    for (std::size_t c = 0; c < side; ++c) {
      if (c + 1 < side) edges.push_back({id(r, c), id(r, c + 1)});
      if (r + 1 < side) edges.push_back({id(r, c), id(r + 1, c)});
    }
  }
  for (std::size_t e = 0; e < edges.size(); ++e) w.push_back(0.1 + rng.uniform());
  return testing::make_graph(side * side, edges, w, 0, side * side - 1);
}

void BM_AnnealSweeps(benchmark::State& state) {
  const auto g = grid_graph(static_cast<std::size_t>(state.range(0)));
  const auto q = encode(g, default_alpha(g));
  const SimulatedAnnealer sa;
  std::uint64_t seed = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(sa.anneal(AnnealRequest{q, 100.0, seed++, 1}));
  }
  state.counters["bits"] = static_cast<double>(q.num_bits());
  state.counters["sweeps/s"] = benchmark::Counter(100.0 * static_cast<double>(state.iterations()),
                                                  benchmark::Counter::kIsRate);
}
BENCHMARK(BM_AnnealSweeps)->Arg(4)->Arg(8)->Arg(10)->Unit(benchmark::kMillisecond);

void BM_BruteForce(benchmark::State& state) {
  RandomStream rng(2);
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto g = testing::random_graph(n, n, rng);
  const auto q = encode(g, default_alpha(g));
  for (auto _ : state) benchmark::DoNotOptimize(brute_force_ground(q));
  state.counters["bits"] = static_cast<double>(q.num_bits());
}
BENCHMARK(BM_BruteForce)->Arg(4)->Arg(6)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_DiffusionMap(benchmark::State& state) {
  RandomStream rng(3);
  PointCloud cloud;
  cloud.points = Eigen::MatrixXd(state.range(0), 2);
  for (Eigen::Index i = 0; i < cloud.points.rows(); ++i) {
    cloud.points(i, 0) = rng.normal();
    cloud.points(i, 1) = rng.normal();
  }
  for (auto _ : state) benchmark::DoNotOptimize(diffusion_map(cloud, 2));
}
BENCHMARK(BM_DiffusionMap)->Arg(200)->Arg(600)->Arg(1200)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
