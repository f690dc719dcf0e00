// Times the OpenMP ensemble runner against the serial reference on a
// stochastic matching-pennies workload and checks that both produce the same
// records.

#include <chrono>
#include <cstdio>
#include <cstring>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "mdvi/analysis.hpp"
#include "mdvi/experiments.hpp"

using namespace mdvi;
namespace chrono = std::chrono;

namespace {

double run_ms(const char* label,
              std::vector<TrajectoryRecord> (*runner)(const VIProblem&, const Schedule&,
                                                      const NoiseModel&, const SimConfig&,
                                                      const EnsembleConfig&),
              const VIProblem& p, const Schedule& s, const NoiseModel& nm, const SimConfig& sim,
              const EnsembleConfig& ens, std::vector<TrajectoryRecord>& out) {
  auto t0 = chrono::high_resolution_clock::now();
  out = runner(p, s, nm, sim, ens);
  auto t1 = chrono::high_resolution_clock::now();
  double ms = chrono::duration<double, std::milli>(t1 - t0).count();
  std::printf("%-18s %10.1f ms\n", label, ms);
  return ms;
}

bool identical(const std::vector<TrajectoryRecord>& a, const std::vector<TrajectoryRecord>& b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i].samples.size() != b[i].samples.size()) return false;
    if (std::memcmp(a[i].y_final.data(), b[i].y_final.data(),
                    a[i].y_final.size() * sizeof(double)) != 0)
      return false;
    for (size_t k = 0; k < a[i].samples.size(); ++k)
      if (a[i].samples[k].gap_xbar != b[i].samples[k].gap_xbar) return false;
  }
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  int seeds = argc > 1 ? std::atoi(argv[1]) : 64;
  double horizon = argc > 2 ? std::atof(argv[2]) : 20.0;

  VIProblem p = make_matching_pennies();
  Schedule sched = Schedule::power(0.25, 0.25);
  Mat sig(4, 4);
  for (int i = 0; i < 4; ++i) sig(i, i) = 0.25;
  NoiseModel nm = NoiseModel::constant_volatility(std::move(sig));

  SimConfig sim;
  sim.dt = 1e-3;
  sim.horizon = horizon;
  sim.base_seed = 7;

  EnsembleConfig ens;
  ens.size = seeds;
  ens.base_seed = 7;

#ifdef _OPENMP
  std::printf("threads: %d, seeds: %d, horizon: %g, dt: %g\n", omp_get_max_threads(), seeds,
              horizon, sim.dt);
#else
  std::printf("OpenMP not enabled; seeds: %d, horizon: %g\n", seeds, horizon);
#endif

  std::vector<TrajectoryRecord> serial, parallel;
  double t_serial = run_ms("serial reference", run_ensemble_serial, p, sched, nm, sim, ens, serial);
  double t_par = run_ms("openmp", run_ensemble, p, sched, nm, sim, ens, parallel);

  bool same = identical(serial, parallel);
  std::printf("records identical: %s\n", same ? "yes" : "NO");
  std::printf("speedup: %.2fx\n", t_serial / t_par);
  return same ? 0 : 1;
}
