#ifndef MDVI_ENSEMBLE_HPP
#define MDVI_ENSEMBLE_HPP

#include <vector>

#include "mdvi/dynamics.hpp"

namespace mdvi {

struct EnsembleConfig {
  int size = 1;
  uint64_t base_seed = 0;
  int workers = 0;  // 0 = all available
};

// Parallel map over seed streams. Each trajectory owns its state and its
// counter-based generator; results land in a slot indexed by stream, so the
// output is identical for any worker count. Uses OpenMP when available.
std::vector<TrajectoryRecord> run_ensemble(const VIProblem& p, const Schedule& sched,
                                           const NoiseModel& nm, const SimConfig& sim,
                                           const EnsembleConfig& ens);

// Plain-loop reference implementation kept for testing and benchmarking.
std::vector<TrajectoryRecord> run_ensemble_serial(const VIProblem& p, const Schedule& sched,
                                                  const NoiseModel& nm, const SimConfig& sim,
                                                  const EnsembleConfig& ens);

}  // namespace mdvi

#endif
