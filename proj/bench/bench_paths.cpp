// Wall-clock timing of the path kernels, serial against parallel.
#include <chrono>
#include <cstdio>
#include <memory>

#include "expembed/chain.hpp"
#include "expembed/pathsim.hpp"
#include "expembed/speed.hpp"

using namespace expembed;

namespace {

template <class F>
double seconds(F&& f) {
  const auto t0 = std::chrono::steady_clock::now();
  f();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

template <class F>
void report(const char* name, F&& kernel) {
  const double s = seconds([&] { kernel(Execution::Serial); });
  const double p = seconds([&] { kernel(Execution::Parallel); });
  std::printf("%-14s serial %8.3f s  parallel %8.3f s  speedup %5.2f\n", name, s, p, s / p);
}

}  // namespace

int main(int argc, char** argv) {
  const std::size_t paths = argc > 1 ? std::stoul(argv[1]) : 20000;
  const Measure mu3 = Measure::atomic({{-1.0, 0.25}, {0.0, 0.5}, {1.0, 0.25}});
  auto p3 = std::make_shared<const PotentialProfile>(mu3);
  const SpeedMeasure sm3 = build_speed_measure(p3);
  const BirthDeathChain chain = build_chain(sm3, mu3);
  const GridSpeed grid = discretize_speed(sm3, 0.01);

  const Measure unif = Measure::validate({{}, {{-1.0, 1.0, 0.5}}, "uniform"});
  const SigmaField field(PotentialProfile{unif});

  std::printf("paths per kernel: %zu\n", paths);
  report("chain", [&](Execution e) { simulate_chain_batch(chain, chain.index_of(0.0), paths * 10, 1, e); });
  report("gap-walk", [&](Execution e) { gap_diffusion_batch(grid, paths, 1, e); });
  report("poisson-stop", [&](Execution e) { poisson_stop_batch(grid, paths, 1, e); });
  report("sde", [&](Execution e) { simulate_sde_batch(field, 1e-3, paths, 1, e); });
  return 0;
}
