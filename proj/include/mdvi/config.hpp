#ifndef MDVI_CONFIG_HPP
#define MDVI_CONFIG_HPP

#include <optional>
#include <string>
#include <vector>

#include "mdvi/analysis.hpp"

namespace mdvi {

// Fully-typed run configuration. Built by validate_config; the object members
// are engaged if and only if validation produced no errors.
struct RunConfig {
  std::string experiment;  // check | simulate | rates | ldp | smallnoise
  std::string output_dir = "out";

  std::optional<VIProblem> problem;
  std::optional<Schedule> schedule;
  NoiseModel noise = NoiseModel::zero();
  SimConfig sim;
  EnsembleConfig ensemble;

  // experiment-specific knobs
  double t_eval = 0.0;
  std::vector<double> delta_grid{1.0, 2.0, 3.0};
  double rate_window_lo = 0.0, rate_window_hi = 0.0;  // 0 = last decade
  double sn_threshold = 0.05;
  double sn_min_fraction = 0.95;
  double sn_horizon2 = 0.0;  // 0 = 2 * horizon
  uint64_t check_seed = 1234;

  std::string echo;  // normalized canonical JSON of the accepted config
};

struct ConfigResult {
  std::optional<RunConfig> config;
  std::vector<std::string> errors;  // aggregated, not fail-fast
  bool ok() const { return errors.empty() && config.has_value(); }
};

// Parses and validates a JSON config. Parse failures carry the position;
// semantic failures name the offending field and the violated hypothesis
// where one applies (H1-H4).
ConfigResult validate_config(const std::string& json_text);

}  // namespace mdvi

#endif
