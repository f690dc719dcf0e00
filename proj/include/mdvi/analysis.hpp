#ifndef MDVI_ANALYSIS_HPP
#define MDVI_ANALYSIS_HPP

#include <optional>
#include <string>
#include <vector>

#include "mdvi/ensemble.hpp"

namespace mdvi {

// Gap of the ergodic average at each sample time (NI gap for matrix games,
// restricted dual gap otherwise).
std::vector<double> ergodic_gap_series(const TrajectoryRecord& rec, const VIProblem& p);

// OLS fit of log(gap) against log(t) over [t_min, t_max].
struct RateFit {
  double exponent = 0.0;
  double intercept = 0.0;  // log-space
  double r_squared = 0.0;
  double t_min = 0.0, t_max = 0.0;
  int n_points = 0;
};

RateFit fit_rate(const std::vector<double>& t, const std::vector<double>& gap, double t_min,
                 double t_max);

// Pathwise audit of the deterministic ergodic bounds: gap(xbar(t)) against
// depth/(eta(t) S(t)) and, for strongly monotone problems,
// ||xbar(t)-x*||^2 against depth/(gamma eta(t) S(t)). Only valid for
// zero-noise records initialized at (0,0).
struct BoundAudit {
  std::vector<double> t, observed, bound, slack;
  int violations = 0;
  double tol_rel = 1e-3;
  std::string flavor;  // "ergodic_gap" or "strong_distance"
};

BoundAudit audit_deterministic_bound(const TrajectoryRecord& rec, const VIProblem& p,
                                     const Schedule& sched, bool noisy_record = false);
BoundAudit audit_strong_distance_bound(const TrajectoryRecord& rec, const VIProblem& p,
                                       const Schedule& sched, bool noisy_record = false);

// Envelope functions of the concentration bound:
//   K(t)  = 2 depth/eta(t) + (sigma*^2/alpha) int_0^t lambda^2 eta
//   Q0(t) = K(t)/S(t)
//   Q1(t) = sqrt(kappa) sigma* diam(X) L(t)/S(t)
struct LdpEnvelope {
  double K = 0.0, Q0 = 0.0, Q1 = 0.0;
};

LdpEnvelope ldp_envelope(const Geometry& geom, const Schedule& sched, double sigma_star, double t);

struct LDPReport {
  double t_eval = 0.0;
  double K = 0.0, q0 = 0.0, q1 = 0.0;
  double kappa = 1.0, diam = 0.0;
  int ensemble_size = 0;
  std::vector<double> delta, empirical, std_error, bound;
  std::vector<double> gaps;           // per-seed ergodic gap at t_eval
  std::vector<int> failed_seeds;
  std::string gap_kind;               // "ni_gap" for games (harder than the dual gap)
};

// Runs the ensemble, evaluates the ergodic gap at t_eval per seed, counts
// exceedances of Q0 + delta*Q1 and compares with exp(-delta^2/4).
LDPReport ldp_experiment(const VIProblem& p, const Schedule& sched, const NoiseModel& nm,
                         const SimConfig& sim, const EnsembleConfig& ens,
                         const std::vector<double>& delta_grid, double t_eval);

LDPReport ldp_report_from_records(const VIProblem& p, const Schedule& sched, const NoiseModel& nm,
                                  const std::vector<TrajectoryRecord>& records,
                                  const std::vector<double>& delta_grid, double t_eval);

// Sample-mean check of the Markov bound: mean over seeds of
// <v(p*), Xbar(t) - p*> <= K(t)/(2 S(t)) + 2 SE.
struct MarkovReport {
  double mean = 0.0;
  double bound = 0.0;      // K/(2S)
  double std_error = 0.0;
  double slack = 0.0;      // bound + 2 SE - mean
  bool holds = false;
  int ensemble_size = 0;
};

MarkovReport mean_gap_markov_check(const VIProblem& p, const Schedule& sched, const NoiseModel& nm,
                                   const std::vector<TrajectoryRecord>& records, double t_eval);

// Small-noise convergence experiment: per-seed final distance to x* and the
// running max of F(x*, Y(t)) over the tail [T/2, T].
struct SmallNoiseReport {
  int seeds = 0;
  double threshold = 0.0;
  double horizon = 0.0;
  int converged = 0;
  double fraction = 0.0;
  double mean_final_fenchel = 0.0;
  std::vector<double> final_distances;
  std::vector<double> tail_max_fenchel;
  std::string note = "threshold and horizon are calibration choices, not derived constants";
};

SmallNoiseReport small_noise_convergence(const VIProblem& p, const NoiseModel& nm,
                                         const SimConfig& sim, const EnsembleConfig& ens,
                                         double distance_threshold);

}  // namespace mdvi

#endif
