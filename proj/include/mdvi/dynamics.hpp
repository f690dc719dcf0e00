#ifndef MDVI_DYNAMICS_HPP
#define MDVI_DYNAMICS_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mdvi/noise.hpp"
#include "mdvi/problems.hpp"
#include "mdvi/rng.hpp"
#include "mdvi/schedule.hpp"

namespace mdvi {

enum class DetScheme { rk4, euler };

// Sample grid: geometric spacing (`per_decade` points per decade from t0 to the
// horizon, horizon always included) unless explicit times are given. All times
// are snapped to multiples of dt.
struct SampleGridSpec {
  double t0 = 0.0;             // 0 means "auto": max(10*dt, horizon/100)
  int per_decade = 40;
  std::vector<double> explicit_times;
};

struct SimConfig {
  double dt = 1e-3;
  double horizon = 0.0;
  SampleGridSpec grid;
  uint64_t base_seed = 0;
  uint64_t stream = 0;        // seed index within an ensemble
  Vec y0;                     // empty = 0 (the default initialization)
  DetScheme det_scheme = DetScheme::rk4;
  int noise_refine = 1;       // Brownian increments generated at dt/noise_refine
  bool record_y = true;
};

// Dual state Y(t), primal state X(t) = Q(eta(t) Y(t)) and running integrals.
// x is re-derived from y after every step, never stored stale.
struct TrajectoryState {
  double t = 0.0;
  uint64_t step_index = 0;
  Vec y;
  Vec x;
  double s_accum = 0.0;    // int_0^t lambda
  double lsq_accum = 0.0;  // int_0^t lambda^2
  Vec xbar_accum;          // int_0^t lambda(s) X(s) ds
};

struct TrajectorySample {
  double t = 0.0;
  Vec x;
  Vec xbar;
  Vec y;             // recorded when SimConfig::record_y
  double gap_x = 0.0;
  double gap_xbar = 0.0;
  double s_accum = 0.0;
  double lsq_accum = 0.0;
  double fenchel = 0.0;  // F(x*, eta(t) Y(t)) when a reference point is known, else NaN
};

struct TrajectoryRecord {
  uint64_t base_seed = 0;
  uint64_t stream = 0;
  bool failed = false;
  double failure_t = 0.0;
  double t_final = 0.0;
  Vec x_final, y_final, xbar_final;
  std::vector<TrajectorySample> samples;
  std::string config_echo;
};

TrajectoryState make_initial_state(const Geometry& geom, const Schedule& sched, const Vec& y0);

// One step of dY = -lambda(t) v(X) dt. RK4 treats (y, accumulators) as one
// augmented system and re-applies the mirror map at every stage; the Euler
// scheme matches the discrete dual-averaging recursion arithmetic exactly.
void det_step(const VIProblem& p, const Schedule& sched, TrajectoryState& st, double dt,
              DetScheme scheme = DetScheme::rk4);

// Euler-Maruyama step Y <- Y - lambda(t) [v(X) dt + sigma(X,t) sqrt(dt) xi];
// Brownian increments are addressed on the fine grid dt/refine so paths are
// shared across step sizes (common random numbers).
void sde_step(const VIProblem& p, const Schedule& sched, const NoiseModel& nm,
              TrajectoryState& st, double dt, const GaussianStream& gs, int refine = 1);

// y_next = y - lam_t v(x) with the caller-provided x = Q(eta_cur y);
// x_next = Q(eta_next y_next).
std::pair<Vec, Vec> discrete_dual_averaging_step(const VIProblem& p, const Vec& y, const Vec& x,
                                                 double lam_t, double eta_next);

std::vector<double> build_sample_grid(const SimConfig& cfg);

// Full trajectory with the gap series evaluated at sample times on both X(t)
// and the ergodic average. Integration failures mark the record and keep the
// samples collected so far.
TrajectoryRecord simulate(const VIProblem& p, const Schedule& sched, const NoiseModel& nm,
                          const SimConfig& cfg);

// CSV: header t,x_1..x_n,xbar_1..xbar_n,gap_x,gap_xbar,S_t,Lsq_t with
// shortest round-trip decimals; optional leading config-echo comment.
void write_csv(std::ostream& os, const TrajectoryRecord& rec, bool with_seed_column = false);
std::string to_csv(const TrajectoryRecord& rec);

// Shortest round-trip decimal for doubles (std::to_chars).
std::string format_double(double v);

}  // namespace mdvi

#endif
