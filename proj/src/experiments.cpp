#include "mdvi/experiments.hpp"

#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace mdvi {

using nlohmann::json;
namespace fs = std::filesystem;

VIProblem make_matching_pennies() {
  Mat M(2, 2);
  M(0, 0) = 1;
  M(0, 1) = -1;
  M(1, 0) = -1;
  M(1, 1) = 1;
  MonotoneOperator op = MonotoneOperator::matrix_game(std::move(M));
  std::vector<DistanceGenerator> parts;
  parts.emplace_back(DgfKind::gibbs_shannon, Domain::simplex(2));
  parts.emplace_back(DgfKind::gibbs_shannon, Domain::simplex(2));
  return VIProblem(std::move(op), Geometry(std::move(parts)), Vec{0.5, 0.5, 0.5, 0.5});
}

VIProblem make_dominance_game() {
  Mat M(2, 2);
  M(0, 0) = 1;
  M(0, 1) = 2;
  M(1, 0) = 0;
  M(1, 1) = 1;
  MonotoneOperator op = MonotoneOperator::matrix_game(std::move(M));
  std::vector<DistanceGenerator> parts;
  parts.emplace_back(DgfKind::gibbs_shannon, Domain::simplex(2));
  parts.emplace_back(DgfKind::gibbs_shannon, Domain::simplex(2));
  return VIProblem(std::move(op), Geometry(std::move(parts)), Vec{0.0, 1.0, 0.0, 1.0});
}

VIProblem make_toy_ball(double gamma, Vec x_star, double rotation_rate) {
  int n = static_cast<int>(x_star.size());
  Mat R;
  if (rotation_rate != 0.0) {
    R = Mat(n, n);
    for (int i = 0; i + 1 < n; i += 2) {
      R(i, i + 1) = rotation_rate;
      R(i + 1, i) = -rotation_rate;
    }
  }
  Domain dom = Domain::ball(n, 1.0);
  MonotoneOperator op =
      MonotoneOperator::strongly_monotone_toy(gamma, x_star, std::move(R), dom);
  return VIProblem(std::move(op), Geometry(DistanceGenerator(DgfKind::euclidean, dom)));
}

namespace {

struct SuiteBuilder {
  std::vector<CheckResult> results;
  void add(const std::string& name, double worst_margin, const std::string& detail = "") {
    results.push_back({name, worst_margin >= 0.0, worst_margin, detail});
  }
};

Vec random_dual(Rng& rng, int n, double scale) {
  Vec y(n);
  for (auto& v : y) v = rng.uniform(-scale, scale);
  return y;
}

// Central finite difference of h* against Q, componentwise relative error.
double mirror_gradient_worst(const DistanceGenerator& g, Rng& rng, int trials) {
  const int n = g.domain().dim();
  double worst = 1e-5;  // margin = tol - err
  for (int k = 0; k < trials; ++k) {
    Vec y = random_dual(rng, n, 4.0);
    Vec q = g.mirror(y);
    for (int i = 0; i < n; ++i) {
      double h = 1e-5 * std::max(1.0, std::fabs(y[i]));
      Vec yp = y, ym = y;
      yp[i] += h;
      ym[i] -= h;
      double fd = (g.conjugate(yp) - g.conjugate(ym)) / (2.0 * h);
      double rel = std::fabs(fd - q[i]) / std::max(std::fabs(q[i]), 1e-9);
      worst = std::min(worst, 1e-5 - rel);
    }
  }
  return worst;
}

double mirror_lipschitz_worst(const DistanceGenerator& g, Rng& rng, int trials) {
  const int n = g.domain().dim();
  double worst = 1.0;
  for (int k = 0; k < trials; ++k) {
    Vec y1 = random_dual(rng, n, 6.0);
    Vec y2 = random_dual(rng, n, 6.0);
    Vec q1 = g.mirror(y1), q2 = g.mirror(y2);
    Vec dq(n), dy(n);
    for (int i = 0; i < n; ++i) {
      dq[i] = q1[i] - q2[i];
      dy[i] = y1[i] - y2[i];
    }
    double lhs = g.primal_norm_of(dq);
    double rhs = g.dual_norm_of(dy) / g.alpha() + 1e-9;
    worst = std::min(worst, rhs - lhs);
  }
  return worst;
}

double fenchel_lower_bound_worst(const DistanceGenerator& g, Rng& rng, int trials) {
  const int n = g.domain().dim();
  double worst = 1.0;
  Vec x(n);
  for (int k = 0; k < trials; ++k) {
    g.domain().sample(rng, x);
    Vec y = random_dual(rng, n, 6.0);
    Vec q = g.mirror(y);
    Vec d(n);
    for (int i = 0; i < n; ++i) d[i] = q[i] - x[i];
    double nb = g.primal_norm_of(d);
    double slack = g.fenchel(x, y) - 0.5 * g.alpha() * nb * nb;
    worst = std::min(worst, slack + 1e-9);
  }
  return worst;
}

double fenchel_increment_worst(const DistanceGenerator& g, Rng& rng, int trials) {
  const int n = g.domain().dim();
  double worst = 1.0;
  Vec x(n);
  for (int k = 0; k < trials; ++k) {
    g.domain().sample(rng, x);
    Vec y = random_dual(rng, n, 5.0);
    Vec yp = random_dual(rng, n, 5.0);
    Vec q = g.mirror(y);
    Vec dy(n), d(n);
    for (int i = 0; i < n; ++i) {
      dy[i] = yp[i] - y[i];
      d[i] = q[i] - x[i];
    }
    double dn = g.dual_norm_of(dy);
    double rhs = g.fenchel(x, y) + dot(dy, d) + dn * dn / (2.0 * g.alpha());
    worst = std::min(worst, rhs - g.fenchel(x, yp) + 1e-9);
  }
  return worst;
}

double subgradient_char_worst(const DistanceGenerator& g, Rng& rng, int trials) {
  const int n = g.domain().dim();
  double worst = 1.0;
  Vec z(n);
  for (int k = 0; k < trials; ++k) {
    Vec y = random_dual(rng, n, 4.0);
    Vec q = g.mirror(y);
    double hq = g.eval(q);
    for (int m = 0; m < 20; ++m) {
      g.domain().sample(rng, z);
      Vec d(n);
      for (int i = 0; i < n; ++i) d[i] = z[i] - q[i];
      // h(z) >= h(q) + <y, z-q> - 1e-8
      worst = std::min(worst, g.eval(z) - hq - dot(y, d) + 1e-8);
    }
  }
  return worst;
}

// F(e1, t e1) decreasing to 0 along the ray on the entropy simplex.
double reciprocity_worst(const DistanceGenerator& g) {
  const int n = g.domain().dim();
  Vec e1(n, 0.0);
  e1[0] = 1.0;
  double prev = std::numeric_limits<double>::infinity();
  double worst = 1.0;
  double last = 0.0;
  for (int t = 1; t <= 30; ++t) {
    Vec y(n, 0.0);
    y[0] = static_cast<double>(t);
    double f = g.fenchel(e1, y);
    worst = std::min(worst, prev - f);  // must decrease
    prev = f;
    last = f;
  }
  worst = std::min(worst, 1e-6 - last);
  return worst;
}

json check_to_json(const std::vector<CheckResult>& results) {
  json out = json::array();
  for (const auto& r : results)
    out.push_back({{"name", r.name},
                   {"pass", r.pass},
                   {"worst_margin", r.worst},
                   {"detail", r.detail}});
  return out;
}

void write_text_file(const fs::path& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  os << content;
  if (!os) throw std::runtime_error("write failed for " + path.string());
}

void write_json_artifact(const fs::path& dir, const std::string& name, json j,
                         const std::string& echo, bool partial = false) {
  if (!echo.empty()) j["config"] = json::parse(echo);
  fs::path p = dir / (partial ? name + ".partial" : name);
  write_text_file(p, j.dump(2) + "\n");
}

void write_run_meta(const fs::path& dir) {
  // timestamps live only here so other artifacts stay byte-identical
  json meta;
  meta["finished_unix_time"] = static_cast<long long>(::time(nullptr));
  write_text_file(dir / "run_meta.json", meta.dump(2) + "\n");
}

std::string gap_series_csv(const std::vector<double>& t, const std::vector<double>& g,
                           const std::string& echo) {
  std::string out;
  if (!echo.empty()) out += "# " + echo + "\n";
  out += "t,gap\n";
  for (size_t i = 0; i < t.size(); ++i)
    out += format_double(t[i]) + "," + format_double(g[i]) + "\n";
  return out;
}

int exp_check(const RunConfig& cfg, const fs::path& dir) {
  auto results = run_property_suite(cfg.check_seed);
  bool ok = all_pass(results);
  json rep;
  rep["pass"] = ok;
  rep["seed"] = cfg.check_seed;
  rep["checks"] = check_to_json(results);
  write_json_artifact(dir, "check_report.json", rep, cfg.echo);
  int failed = 0;
  for (const auto& r : results)
    if (!r.pass) ++failed;
  std::cout << "check: " << (ok ? "PASS" : "FAIL") << " (" << results.size() << " checks, "
            << failed << " failed) -> " << (dir / "check_report.json").string() << "\n";
  return ok ? 0 : 2;
}

int exp_simulate(const RunConfig& cfg, const fs::path& dir) {
  const VIProblem& p = *cfg.problem;
  SimConfig sim = cfg.sim;
  sim.base_seed = cfg.ensemble.base_seed;
  TrajectoryRecord rec = simulate(p, *cfg.schedule, cfg.noise, sim);
  rec.config_echo = cfg.echo;
  write_text_file(dir / (rec.failed ? "trajectory.csv.partial" : "trajectory.csv"), to_csv(rec));

  json rep;
  rep["failed"] = rec.failed;
  if (rec.failed) rep["failure_t"] = rec.failure_t;
  rep["t_final"] = rec.t_final;
  rep["x_final"] = rec.x_final;
  rep["xbar_final"] = rec.xbar_final;
  int violations = 0;
  if (!rec.samples.empty()) {
    rep["gap_x_final"] = rec.samples.back().gap_x;
    rep["gap_xbar_final"] = rec.samples.back().gap_xbar;
    if (cfg.noise.is_zero() && sim.y0.empty()) {
      BoundAudit audit = audit_deterministic_bound(rec, p, *cfg.schedule);
      violations = audit.violations;
      rep["bound_audit"] = {{"flavor", audit.flavor},
                            {"violations", audit.violations},
                            {"points", audit.t.size()}};
      if (p.op.monotonicity() == MonotonicityClass::strong) {
        BoundAudit sa = audit_strong_distance_bound(rec, p, *cfg.schedule);
        violations += sa.violations;
        rep["strong_audit"] = {{"flavor", sa.flavor},
                               {"violations", sa.violations},
                               {"points", sa.t.size()}};
      }
    }
  }
  write_json_artifact(dir, "summary.json", rep, cfg.echo, rec.failed);
  std::cout << "simulate: " << (rec.failed ? "FAILED" : "ok") << " t_final="
            << format_double(rec.t_final)
            << (rec.samples.empty()
                    ? ""
                    : " gap_xbar=" + format_double(rec.samples.back().gap_xbar))
            << " audit_violations=" << violations << "\n";
  return rec.failed || violations > 0 ? 2 : 0;
}

int exp_rates(const RunConfig& cfg, const fs::path& dir) {
  const VIProblem& p = *cfg.problem;
  SimConfig sim = cfg.sim;
  sim.base_seed = cfg.ensemble.base_seed;

  std::vector<double> t, mean_gap;
  bool any_failed = false;
  if (cfg.ensemble.size == 1 && cfg.noise.is_zero()) {
    TrajectoryRecord rec = simulate(p, *cfg.schedule, cfg.noise, sim);
    any_failed = rec.failed;
    for (const auto& s : rec.samples) {
      t.push_back(s.t);
      mean_gap.push_back(s.gap_xbar);
    }
  } else {
    auto records = run_ensemble(p, *cfg.schedule, cfg.noise, sim, cfg.ensemble);
    for (const auto& r : records) any_failed = any_failed || r.failed;
    const size_t ns = records.front().samples.size();
    t.resize(ns);
    mean_gap.resize(ns);
    std::vector<double> vals(records.size());
    for (size_t i = 0; i < ns; ++i) {
      t[i] = records.front().samples[i].t;
      for (size_t r = 0; r < records.size(); ++r) vals[r] = records[r].samples[i].gap_xbar;
      mean_gap[i] = pairwise_sum(vals) / static_cast<double>(vals.size());
    }
  }

  double lo = cfg.rate_window_lo, hi = cfg.rate_window_hi;
  if (!(lo > 0.0)) {  // default: last decade of the horizon
    hi = cfg.sim.horizon;
    lo = hi / 10.0;
  }
  RateFit fit = fit_rate(t, mean_gap, lo, hi);

  json rep;
  rep["exponent"] = fit.exponent;
  rep["intercept"] = fit.intercept;
  rep["r_squared"] = fit.r_squared;
  rep["window"] = {fit.t_min, fit.t_max};
  rep["n_points"] = fit.n_points;
  rep["ensemble_size"] = cfg.ensemble.size;
  write_json_artifact(dir, "rates.json", rep, cfg.echo, any_failed);
  write_text_file(dir / (any_failed ? "gap_series.csv.partial" : "gap_series.csv"),
                  gap_series_csv(t, mean_gap, cfg.echo));
  std::cout << "rates: exponent=" << format_double(fit.exponent)
            << " r2=" << format_double(fit.r_squared) << " window=[" << format_double(lo) << ","
            << format_double(hi) << "]\n";
  return any_failed ? 2 : 0;
}

int exp_ldp(const RunConfig& cfg, const fs::path& dir) {
  const VIProblem& p = *cfg.problem;
  SimConfig sim = cfg.sim;
  sim.base_seed = cfg.ensemble.base_seed;
  if (sim.grid.explicit_times.empty()) sim.grid.explicit_times = {cfg.t_eval};

  LDPReport rep = ldp_experiment(p, *cfg.schedule, cfg.noise, sim, cfg.ensemble, cfg.delta_grid,
                                 cfg.t_eval);
  bool ok = true;
  json rows = json::array();
  for (size_t i = 0; i < rep.delta.size(); ++i) {
    bool within = rep.empirical[i] <= rep.bound[i] + 2.0 * rep.std_error[i];
    ok = ok && within;
    rows.push_back({{"delta", rep.delta[i]},
                    {"empirical", rep.empirical[i]},
                    {"std_error", rep.std_error[i]},
                    {"bound", rep.bound[i]},
                    {"within_bound", within}});
  }
  json out;
  out["t_eval"] = rep.t_eval;
  out["K"] = rep.K;
  out["q0"] = rep.q0;
  out["q1"] = rep.q1;
  out["kappa"] = rep.kappa;
  out["diam"] = rep.diam;
  out["ensemble_size"] = rep.ensemble_size;
  out["gap_kind"] = rep.gap_kind;  // NI gap dominates the dual gap, a harder test
  out["rows"] = rows;
  out["failed_seeds"] = rep.failed_seeds;
  bool partial = !rep.failed_seeds.empty();
  write_json_artifact(dir, "ldp.json", out, cfg.echo, partial);

  std::string csv = "delta,empirical,std_error,bound\n";
  for (size_t i = 0; i < rep.delta.size(); ++i)
    csv += format_double(rep.delta[i]) + "," + format_double(rep.empirical[i]) + "," +
           format_double(rep.std_error[i]) + "," + format_double(rep.bound[i]) + "\n";
  write_text_file(dir / (partial ? "ldp.csv.partial" : "ldp.csv"), csv);

  std::string gaps = "seed,gap\n";
  for (size_t i = 0; i < rep.gaps.size(); ++i)
    gaps += std::to_string(i) + "," + format_double(rep.gaps[i]) + "\n";
  write_text_file(dir / (partial ? "gaps.csv.partial" : "gaps.csv"), gaps);

  std::cout << "ldp: " << (ok ? "within bound" : "BOUND EXCEEDED") << " at t=" <<
      format_double(rep.t_eval) << " (seeds=" << rep.ensemble_size << ")\n";
  return ok && !partial ? 0 : 2;
}

int exp_smallnoise(const RunConfig& cfg, const fs::path& dir) {
  const VIProblem& p = *cfg.problem;
  SimConfig sim = cfg.sim;
  sim.base_seed = cfg.ensemble.base_seed;
  SmallNoiseReport rep =
      small_noise_convergence(p, cfg.noise, sim, cfg.ensemble, cfg.sn_threshold);

  double horizon2 = cfg.sn_horizon2 > 0.0 ? cfg.sn_horizon2 : 2.0 * cfg.sim.horizon;
  SimConfig sim2 = sim;
  sim2.horizon = horizon2;  // same streams: common random numbers over the shared prefix
  SmallNoiseReport rep2 =
      small_noise_convergence(p, cfg.noise, sim2, cfg.ensemble, cfg.sn_threshold);

  bool frac_ok = rep.fraction >= cfg.sn_min_fraction;
  bool fenchel_ok = rep2.mean_final_fenchel <= rep.mean_final_fenchel;

  json out;
  out["horizon"] = rep.horizon;
  out["threshold"] = rep.threshold;
  out["threshold_note"] = rep.note;
  out["seeds"] = rep.seeds;
  out["converged"] = rep.converged;
  out["fraction"] = rep.fraction;
  out["min_fraction"] = cfg.sn_min_fraction;
  out["mean_final_fenchel"] = rep.mean_final_fenchel;
  out["horizon2"] = horizon2;
  out["mean_final_fenchel_horizon2"] = rep2.mean_final_fenchel;
  out["fenchel_nonincreasing"] = fenchel_ok;
  out["final_distances"] = rep.final_distances;
  out["tail_max_fenchel"] = rep.tail_max_fenchel;
  write_json_artifact(dir, "smallnoise.json", out, cfg.echo);

  std::cout << "smallnoise: fraction=" << format_double(rep.fraction) << " (need >= "
            << format_double(cfg.sn_min_fraction) << "), mean F " << format_double(rep.mean_final_fenchel)
            << " -> " << format_double(rep2.mean_final_fenchel) << " at t=" << format_double(horizon2)
            << "\n";
  return frac_ok && fenchel_ok ? 0 : 2;
}

}  // namespace

std::vector<CheckResult> run_property_suite(uint64_t seed) {
  SuiteBuilder sb;
  Rng rng(seed);

  std::vector<std::pair<std::string, DistanceGenerator>> geoms;
  geoms.emplace_back("entropy_simplex2",
                     DistanceGenerator(DgfKind::gibbs_shannon, Domain::simplex(2)));
  geoms.emplace_back("entropy_simplex4",
                     DistanceGenerator(DgfKind::gibbs_shannon, Domain::simplex(4)));
  geoms.emplace_back("fermi_dirac3", DistanceGenerator(DgfKind::fermi_dirac, Domain::box(3, 0, 1)));
  geoms.emplace_back("euclidean_ball2", DistanceGenerator(DgfKind::euclidean, Domain::ball(2, 1.0)));
  geoms.emplace_back("euclidean_box2", DistanceGenerator(DgfKind::euclidean, Domain::box(2, 0, 1)));
  geoms.emplace_back("euclidean_simplex3",
                     DistanceGenerator(DgfKind::euclidean, Domain::simplex(3)));

  for (const auto& [name, g] : geoms) {
    sb.add("mirror_gradient_identity/" + name, mirror_gradient_worst(g, rng, 100));
    sb.add("mirror_lipschitz/" + name, mirror_lipschitz_worst(g, rng, 1000));
    sb.add("fenchel_lower_bound/" + name, fenchel_lower_bound_worst(g, rng, 1000));
    sb.add("fenchel_increment/" + name, fenchel_increment_worst(g, rng, 1000));
    sb.add("subgradient_characterization/" + name, subgradient_char_worst(g, rng, 50));
  }
  sb.add("fenchel_reciprocity/entropy_simplex4",
         reciprocity_worst(DistanceGenerator(DgfKind::gibbs_shannon, Domain::simplex(4))));

  // strong-convexity midpoint test per geometry
  for (const auto& [name, g] : geoms) {
    const int n = g.domain().dim();
    double worst = 1.0;
    Vec x(n), xp(n), mid(n), d(n);
    for (int k = 0; k < 500; ++k) {
      Rng& r = rng;
      g.domain().sample(r, x);
      g.domain().sample(r, xp);
      for (int i = 0; i < n; ++i) {
        mid[i] = 0.5 * (x[i] + xp[i]);
        d[i] = x[i] - xp[i];
      }
      double nd = g.primal_norm_of(d);
      double slack = 0.5 * (g.eval(x) + g.eval(xp)) - g.alpha() / 8.0 * nd * nd - g.eval(mid);
      worst = std::min(worst, slack + 1e-9);
    }
    sb.add("strong_convexity_midpoint/" + name, worst);
  }

  // monotonicity probes on the canonical problems
  {
    VIProblem mp = make_matching_pennies();
    ProbeReport pr = monotonicity_probe(mp, 1000, seed + 1);
    sb.add("monotone/matching_pennies", pr.min_inner + 1e-9);
    sb.add("lipschitz/matching_pennies",
           mp.op.lipschitz() * (1.0 + 1e-6) - pr.max_lipschitz_ratio);

    VIProblem toy = make_toy_ball(2.0, Vec{0.0, 0.0}, 1.0);
    ProbeReport pt = monotonicity_probe(toy, 1000, seed + 2);
    sb.add("strong_modulus/toy_gamma2", pt.min_modulus - 2.0 + 1e-9);

    Mat A(2, 2);
    A(0, 1) = 1.0;
    A(1, 0) = -1.0;
    VIProblem skew(MonotoneOperator::affine(std::move(A), {}, Domain::box(2, -1, 1)),
                   Geometry(DistanceGenerator(DgfKind::euclidean, Domain::box(2, -1, 1))));
    ProbeReport ps = monotonicity_probe(skew, 1000, seed + 3);
    sb.add("monotone/skew_affine", ps.min_inner + 1e-9);
    sb.add("skew_affine_not_strict", 1e-9 - std::fabs(ps.min_inner));
  }

  // gap functions vanish at reference solutions; NI dominates the dual gap
  {
    VIProblem mp = make_matching_pennies();
    Vec xs = reference_solution(mp);
    sb.add("gap_at_solution/matching_pennies", 1e-9 - ni_gap(mp, xs));
    sb.add("dual_gap_at_solution/matching_pennies", 1e-7 - restricted_dual_gap(mp, xs));

    double worst = 1.0;
    Rng r2(seed + 4);
    Vec x(4);
    for (int k = 0; k < 200; ++k) {
      mp.domain().sample(r2, x);
      double g = restricted_dual_gap(mp, x);
      double G = ni_gap(mp, x);
      worst = std::min(worst, G - g + 1e-9);
      worst = std::min(worst, g);  // nonnegative
    }
    sb.add("ni_dominates_dual_gap/matching_pennies", worst);

    VIProblem toy = make_toy_ball(1.0, Vec{0.2, 0.3});
    sb.add("dual_gap_at_solution/toy", 1e-7 - restricted_dual_gap(toy, Vec{0.2, 0.3}));
  }

  return sb.results;
}

bool all_pass(const std::vector<CheckResult>& results) {
  for (const auto& r : results)
    if (!r.pass) return false;
  return true;
}

int run_experiment(const RunConfig& cfg) {
  fs::path dir(cfg.output_dir);
  fs::create_directories(dir);
  int code = 0;
  if (cfg.experiment == "check")
    code = exp_check(cfg, dir);
  else if (cfg.experiment == "simulate")
    code = exp_simulate(cfg, dir);
  else if (cfg.experiment == "rates")
    code = exp_rates(cfg, dir);
  else if (cfg.experiment == "ldp")
    code = exp_ldp(cfg, dir);
  else if (cfg.experiment == "smallnoise")
    code = exp_smallnoise(cfg, dir);
  else
    throw std::invalid_argument("unknown experiment: " + cfg.experiment);
  write_run_meta(dir);
  return code;
}

}  // namespace mdvi
