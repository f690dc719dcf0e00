#include "mdvi/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mdvi {

std::vector<double> ergodic_gap_series(const TrajectoryRecord& rec, const VIProblem& p) {
  if (rec.samples.empty()) throw std::invalid_argument("empty trajectory record");
  GapEvaluator eval(p);
  std::vector<double> out;
  out.reserve(rec.samples.size());
  for (const auto& s : rec.samples) out.push_back(solution_gap(p, eval, s.xbar));
  return out;
}

RateFit fit_rate(const std::vector<double>& t, const std::vector<double>& gap, double t_min,
                 double t_max) {
  if (t.size() != gap.size()) throw std::invalid_argument("series length mismatch");
  std::vector<double> lx, ly;
  for (size_t i = 0; i < t.size(); ++i) {
    if (t[i] < t_min || t[i] > t_max) continue;
    if (!(gap[i] > 0.0)) throw DegenerateDataError("nonpositive gap value inside the fit window");
    if (gap[i] < 1e-14) continue;  // excluded, never floored
    lx.push_back(std::log(t[i]));
    ly.push_back(std::log(gap[i]));
  }
  if (lx.size() < 10) throw DegenerateDataError("need at least 10 sample points in the window");

  const double n = static_cast<double>(lx.size());
  double mx = 0.0, my = 0.0;
  for (size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (size_t i = 0; i < lx.size(); ++i) {
    double dx = lx[i] - mx, dy = ly[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx <= 0.0) throw DegenerateDataError("degenerate time window");

  RateFit fit;
  fit.exponent = sxy / sxx;
  fit.intercept = my - fit.exponent * mx;
  double ss_res = std::max(syy - sxy * sxy / sxx, 0.0);
  fit.r_squared = syy > 0.0 ? std::clamp(1.0 - ss_res / syy, 0.0, 1.0) : 1.0;
  fit.t_min = t_min;
  fit.t_max = t_max;
  fit.n_points = static_cast<int>(lx.size());
  return fit;
}

namespace {

BoundAudit audit_impl(const TrajectoryRecord& rec, const VIProblem& p, const Schedule& sched,
                      bool noisy_record, bool strong_flavor) {
  if (noisy_record)
    throw std::invalid_argument("bound audit holds pathwise only for zero-noise runs");
  if (rec.samples.empty()) throw std::invalid_argument("empty trajectory record");

  BoundAudit audit;
  audit.flavor = strong_flavor ? "strong_distance" : "ergodic_gap";
  const double depth = p.geom.depth();

  std::optional<Vec> xs;
  double gamma = 0.0;
  if (strong_flavor) {
    if (p.op.monotonicity() != MonotonicityClass::strong)
      throw std::invalid_argument("strong-distance audit needs a strongly monotone problem");
    gamma = p.op.strong_modulus();
    xs = reference_solution(p);
  }

  GapEvaluator eval(p);
  for (const auto& s : rec.samples) {
    if (s.t <= 0.0) continue;
    double denom = sched.eta(s.t) * sched.S(s.t);
    double bound = strong_flavor ? depth / (gamma * denom) : depth / denom;
    double obs;
    if (strong_flavor) {
      double d2 = 0.0;
      for (size_t i = 0; i < s.xbar.size(); ++i) {
        double d = s.xbar[i] - (*xs)[i];
        d2 += d * d;
      }
      obs = d2;
    } else {
      obs = solution_gap(p, eval, s.xbar);
    }
    double slack = bound - obs;
    audit.t.push_back(s.t);
    audit.observed.push_back(obs);
    audit.bound.push_back(bound);
    audit.slack.push_back(slack);
    if (slack < -(audit.tol_rel * std::fabs(bound) + 1e-6)) ++audit.violations;
  }
  return audit;
}

}  // namespace

BoundAudit audit_deterministic_bound(const TrajectoryRecord& rec, const VIProblem& p,
                                     const Schedule& sched, bool noisy_record) {
  return audit_impl(rec, p, sched, noisy_record, false);
}

BoundAudit audit_strong_distance_bound(const TrajectoryRecord& rec, const VIProblem& p,
                                       const Schedule& sched, bool noisy_record) {
  return audit_impl(rec, p, sched, noisy_record, true);
}

LdpEnvelope ldp_envelope(const Geometry& geom, const Schedule& sched, double sigma_star,
                         double t) {
  if (!(t > 0.0)) throw std::invalid_argument("envelope time must be > 0");
  LdpEnvelope env;
  const double depth = geom.depth();
  const double alpha = geom.ldp_alpha();
  env.K = 2.0 * depth / sched.eta(t) +
          (sigma_star * sigma_star / alpha) * sched.lam_sq_eta_integral(t);
  const double S = sched.S(t);
  env.Q0 = env.K / S;
  env.Q1 = std::sqrt(geom.kappa()) * sigma_star * geom.diameter() * sched.L(t) / S;
  return env;
}

LDPReport ldp_report_from_records(const VIProblem& p, const Schedule& sched, const NoiseModel& nm,
                                  const std::vector<TrajectoryRecord>& records,
                                  const std::vector<double>& delta_grid, double t_eval) {
  LDPReport rep;
  rep.t_eval = t_eval;
  rep.ensemble_size = static_cast<int>(records.size());
  rep.kappa = p.geom.kappa();
  rep.diam = p.geom.diameter();
  rep.gap_kind = p.op.kind() == OperatorKind::matrix_game ? "ni_gap" : "restricted_dual_gap";

  LdpEnvelope env = ldp_envelope(p.geom, sched, nm.sigma_star(), t_eval);
  rep.K = env.K;
  rep.q0 = env.Q0;
  rep.q1 = env.Q1;

  GapEvaluator eval(p);
  for (size_t i = 0; i < records.size(); ++i) {
    const auto& rec = records[i];
    if (rec.failed) {
      rep.failed_seeds.push_back(static_cast<int>(i));
      continue;
    }
    const TrajectorySample* hit = nullptr;
    for (const auto& s : rec.samples)
      if (std::fabs(s.t - t_eval) <= 1e-9 * std::max(1.0, t_eval)) hit = &s;
    if (!hit) throw std::invalid_argument("sample grid does not contain t_eval");
    rep.gaps.push_back(solution_gap(p, eval, hit->xbar));
  }

  const double n = static_cast<double>(rep.gaps.size());
  for (double d : delta_grid) {
    double thr = rep.q0 + d * rep.q1;
    double count = 0.0;
    for (double g : rep.gaps)
      if (g > thr) count += 1.0;
    double freq = n > 0.0 ? count / n : 0.0;
    rep.delta.push_back(d);
    rep.empirical.push_back(freq);
    rep.std_error.push_back(n > 0.0 ? std::sqrt(freq * (1.0 - freq) / n) : 0.0);
    rep.bound.push_back(std::exp(-d * d / 4.0));
  }
  return rep;
}

LDPReport ldp_experiment(const VIProblem& p, const Schedule& sched, const NoiseModel& nm,
                         const SimConfig& sim, const EnsembleConfig& ens,
                         const std::vector<double>& delta_grid, double t_eval) {
  if (ens.size < 100) throw std::invalid_argument("LDP experiment needs an ensemble of >= 100");
  SimConfig cfg = sim;
  if (!cfg.y0.empty())
    throw std::invalid_argument("LDP experiment requires the (0,0) initialization");
  auto records = run_ensemble(p, sched, nm, cfg, ens);
  return ldp_report_from_records(p, sched, nm, records, delta_grid, t_eval);
}

MarkovReport mean_gap_markov_check(const VIProblem& p, const Schedule& sched, const NoiseModel& nm,
                                   const std::vector<TrajectoryRecord>& records, double t_eval) {
  if (records.size() < 100)
    throw std::invalid_argument("Markov check needs an ensemble of >= 100");
  Vec ref = reference_solution(p);
  Vec v = p.op.value(ref);

  std::vector<double> vals;
  for (const auto& rec : records) {
    if (rec.failed) continue;
    for (const auto& s : rec.samples)
      if (std::fabs(s.t - t_eval) <= 1e-9 * std::max(1.0, t_eval)) {
        double acc = 0.0;
        for (size_t i = 0; i < ref.size(); ++i) acc += v[i] * (s.xbar[i] - ref[i]);
        vals.push_back(acc);
      }
  }
  if (vals.empty()) throw std::invalid_argument("sample grid does not contain t_eval");

  MarkovReport rep;
  rep.ensemble_size = static_cast<int>(vals.size());
  const double n = static_cast<double>(vals.size());
  rep.mean = pairwise_sum(vals) / n;
  double var = 0.0;
  for (double x : vals) var += (x - rep.mean) * (x - rep.mean);
  var /= std::max(n - 1.0, 1.0);
  rep.std_error = std::sqrt(var / n);

  LdpEnvelope env = ldp_envelope(p.geom, sched, nm.sigma_star(), t_eval);
  rep.bound = env.K / (2.0 * sched.S(t_eval));
  rep.slack = rep.bound + 2.0 * rep.std_error - rep.mean;
  rep.holds = rep.slack >= 0.0;
  return rep;
}

SmallNoiseReport small_noise_convergence(const VIProblem& p, const NoiseModel& nm,
                                         const SimConfig& sim, const EnsembleConfig& ens,
                                         double distance_threshold) {
  if (nm.kind() != NoiseModel::Kind::decaying && !nm.is_zero())
    throw std::invalid_argument("small-noise experiment needs the decaying noise model");
  if (p.op.monotonicity() == MonotonicityClass::monotone)
    throw std::invalid_argument("small-noise experiment needs a strictly/strongly monotone problem");
  Vec xs = reference_solution(p);

  Schedule sched = Schedule::constant(1.0, 1.0);  // the small-noise regime
  auto records = run_ensemble(p, sched, nm, sim, ens);

  SmallNoiseReport rep;
  rep.seeds = static_cast<int>(records.size());
  rep.threshold = distance_threshold;
  rep.horizon = sim.horizon;

  std::vector<double> finals;
  for (const auto& rec : records) {
    double d2 = 0.0;
    for (size_t i = 0; i < xs.size(); ++i) {
      double d = rec.x_final[i] - xs[i];
      d2 += d * d;
    }
    double dist = std::sqrt(d2);
    rep.final_distances.push_back(dist);
    if (!rec.failed && dist <= distance_threshold) ++rep.converged;

    double tail_max = 0.0;
    for (const auto& s : rec.samples)
      if (s.t >= 0.5 * sim.horizon && std::isfinite(s.fenchel))
        tail_max = std::max(tail_max, s.fenchel);
    rep.tail_max_fenchel.push_back(tail_max);
    if (!rec.samples.empty()) finals.push_back(rec.samples.back().fenchel);
  }
  rep.fraction = rep.seeds > 0 ? static_cast<double>(rep.converged) / rep.seeds : 0.0;
  rep.mean_final_fenchel =
      finals.empty() ? std::numeric_limits<double>::quiet_NaN()
                     : pairwise_sum(finals) / static_cast<double>(finals.size());
  return rep;
}

}  // namespace mdvi
