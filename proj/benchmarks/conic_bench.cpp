#include <benchmark/benchmark.h>

#include <random>
#include <sstream>

#include "nrsfm/conic/backend.hpp"
#include "nrsfm/conic/ir_format.hpp"
#include "nrsfm/geometry.hpp"

using namespace nrsfm;
using namespace nrsfm::conic;

namespace {

ConicProgram edm_program(int n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Vec3> pts(n);
  for (auto& p : pts) p = {u(rng), u(rng), u(rng)};
  ConicProgram prog;
  const int Y = prog.add_psd(n, "Y");
  LinearFunctional tr;
  tr.block = Y;
  for (int a = 0; a < n; ++a) tr.add(a, a, 1.0);
  prog.add_objective(tr);
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      LinearFunctional f;
      f.block = Y;
      f.add(a, a, 1.0);
      f.add(b, b, 1.0);
      f.add(a, b, -2.0);
      prog.add_equality({f}, (pts[a] - pts[b]).squaredNorm(), "edm");
    }
  }
  return prog;
}

}  // namespace

static void BM_EdmCompletion(benchmark::State& state) {
  const auto prog = edm_program(static_cast<int>(state.range(0)), 7);
  for (auto _ : state) {
    auto sol = solve_interior_point(prog);
    benchmark::DoNotOptimize(sol.objective);
  }
}
BENCHMARK(BM_EdmCompletion)->Arg(5)->Arg(10)->Arg(20)->Unit(benchmark::kMillisecond);

static void BM_IrRoundTrip(benchmark::State& state) {
  const auto prog = edm_program(static_cast<int>(state.range(0)), 8);
  for (auto _ : state) {
    std::stringstream ss;
    write_program(ss, prog);
    auto back = read_program(ss);
    benchmark::DoNotOptimize(back.num_constraints());
  }
}
BENCHMARK(BM_IrRoundTrip)->Arg(10)->Arg(30);
