#ifndef MDVI_EXPERIMENTS_HPP
#define MDVI_EXPERIMENTS_HPP

#include <string>
#include <vector>

#include "mdvi/config.hpp"

namespace mdvi {

// One named property check with its worst observed margin (>= 0 passes).
struct CheckResult {
  std::string name;
  bool pass = false;
  double worst = 0.0;
  std::string detail;
};

// Mirror-map, Fenchel-coupling and monotonicity property suite over the three
// geometries and the canonical test problems. Deterministic for a fixed seed.
std::vector<CheckResult> run_property_suite(uint64_t seed);
bool all_pass(const std::vector<CheckResult>& results);

// Canonical problems used by the suite and the shipped configs.
VIProblem make_matching_pennies();
VIProblem make_dominance_game();   // [[1,2],[0,1]]: pure equilibrium, O(1/t) gap decay
VIProblem make_toy_ball(double gamma, Vec x_star, double rotation_rate = 0.0);

// Runs one experiment end to end: simulation(s), analysis, artifact files in
// cfg.output_dir, a one-line summary on stdout. Returns the process exit code
// (0 success; 2 when an audited bound or property fails).
int run_experiment(const RunConfig& cfg);

}  // namespace mdvi

#endif
