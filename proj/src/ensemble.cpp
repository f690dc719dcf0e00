#include "mdvi/ensemble.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace mdvi {

namespace {
TrajectoryRecord run_one(const VIProblem& p, const Schedule& sched, const NoiseModel& nm,
                         SimConfig sim, uint64_t base_seed, int stream) {
  sim.base_seed = base_seed;
  sim.stream = static_cast<uint64_t>(stream);
  return simulate(p, sched, nm, sim);
}
}  // namespace

std::vector<TrajectoryRecord> run_ensemble(const VIProblem& p, const Schedule& sched,
                                           const NoiseModel& nm, const SimConfig& sim,
                                           const EnsembleConfig& ens) {
  std::vector<TrajectoryRecord> out(ens.size);
#ifdef _OPENMP
  int workers = ens.workers > 0 ? ens.workers : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(workers)
  for (int i = 0; i < ens.size; ++i) out[i] = run_one(p, sched, nm, sim, ens.base_seed, i);
#else
  for (int i = 0; i < ens.size; ++i) out[i] = run_one(p, sched, nm, sim, ens.base_seed, i);
#endif
  return out;
}

std::vector<TrajectoryRecord> run_ensemble_serial(const VIProblem& p, const Schedule& sched,
                                                  const NoiseModel& nm, const SimConfig& sim,
                                                  const EnsembleConfig& ens) {
  std::vector<TrajectoryRecord> out(ens.size);
  for (int i = 0; i < ens.size; ++i) out[i] = run_one(p, sched, nm, sim, ens.base_seed, i);
  return out;
}

}  // namespace mdvi
