#include <benchmark/benchmark.h>

#include <random>

#include "nrsfm/geometry.hpp"
#include "nrsfm/lifting.hpp"

using namespace nrsfm;

static void BM_AreaQuarticCoeffs(benchmark::State& state) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  std::vector<Vec3> d(300);
  for (auto& v : d) v = Vec3(g(rng), g(rng), g(rng)).normalized();
  std::size_t k = 0;
  for (auto _ : state) {
    auto c = area_quartic_coeffs(d[k % 300], d[(k + 1) % 300], d[(k + 2) % 300]);
    benchmark::DoNotOptimize(c.evaluate(1.0, 1.1, 0.9));
    ++k;
  }
}
BENCHMARK(BM_AreaQuarticCoeffs);

static void BM_AreaFunctionalPP(benchmark::State& state) {
  const auto graph = make_graph(4, {{0, 1}, {0, 2}, {1, 2}, {1, 3}, {2, 3}});
  const auto maps = build_lift_maps(graph);
  const PointCloud P{{0, 0, 1}, {0.3, 0, 1.1}, {0, 0.3, 0.9}, {0.3, 0.3, 1}};
  const Eigen::VectorXd v = position_lift_vector(P, maps);
  const Eigen::MatrixXd U = v * v.transpose();
  for (auto _ : state) {
    auto f = g_E_pp(graph.e3[0], maps);
    benchmark::DoNotOptimize(f.evaluate(U));
  }
}
BENCHMARK(BM_AreaFunctionalPP);

static void BM_LiftMaps(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  std::vector<Vec2> xy;
  for (int a = 0; a < side; ++a)
    for (int b = 0; b < side; ++b) xy.emplace_back(a + 0.01 * b * b, b + 0.02 * a);
  const auto graph = make_graph(side * side, build_e2(xy, 4), {}, xy);
  for (auto _ : state) {
    auto maps = build_lift_maps(graph);
    benchmark::DoNotOptimize(maps.u_dim());
    auto pairs = consistency_constraints_U(graph, maps);
    benchmark::DoNotOptimize(pairs.size());
  }
}
BENCHMARK(BM_LiftMaps)->Arg(4)->Arg(8)->Arg(16);

BENCHMARK_MAIN();
