#include "mdvi/dynamics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

namespace mdvi {

TrajectoryState make_initial_state(const Geometry& geom, const Schedule& sched, const Vec& y0) {
  TrajectoryState st;
  const int n = geom.dim();
  st.y = y0.empty() ? Vec(n, 0.0) : y0;
  if (st.y.size() != static_cast<size_t>(n))
    throw std::invalid_argument("initial dual vector dimension mismatch");
  Vec scaled(n);
  double eta0 = sched.eta(0.0);
  for (int i = 0; i < n; ++i) scaled[i] = eta0 * st.y[i];
  st.x = geom.mirror(scaled);
  st.xbar_accum.assign(n, 0.0);
  return st;
}

namespace {

void check_finite(const TrajectoryState& st, double t_last) {
  if (!all_finite(st.y) || !all_finite(st.x)) throw NumericDivergence(t_last);
}

// x = Q(eta(t) y)
void refresh_primal(const Geometry& geom, const Schedule& sched, double t, const Vec& y, Vec& x,
                    Vec& scratch) {
  double eta = sched.eta(t);
  for (size_t i = 0; i < y.size(); ++i) scratch[i] = eta * y[i];
  geom.mirror(scratch, x);
}

}  // namespace

void det_step(const VIProblem& p, const Schedule& sched, TrajectoryState& st, double dt,
              DetScheme scheme) {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be > 0");
  const int n = p.dim();
  const double t0 = st.t;
  const double t1 = st.t + dt;

  if (scheme == DetScheme::euler) {
    // identical arithmetic to discrete_dual_averaging_step with lam_t = lambda(t) dt
    Vec v(n);
    p.op.value(st.x, v);
    const double w = sched.lambda(t0) * dt;
    for (int i = 0; i < n; ++i) st.y[i] -= w * v[i];
    if (!all_finite(st.y)) throw NumericDivergence(t0);
    Vec x_prev = st.x;
    Vec scratch(n);
    refresh_primal(p.geom, sched, t1, st.y, st.x, scratch);
    // trapezoid accumulators: nonnegative weights keep xbar a convex combination
    const double l0 = sched.lambda(t0), l1 = sched.lambda(t1);
    st.s_accum += 0.5 * dt * (l0 + l1);
    st.lsq_accum += 0.5 * dt * (l0 * l0 + l1 * l1);
    for (int i = 0; i < n; ++i)
      st.xbar_accum[i] += 0.5 * dt * (l0 * x_prev[i] + l1 * st.x[i]);
    st.t = t1;
    ++st.step_index;
    check_finite(st, t0);
    return;
  }

  // classical RK4 on the augmented system (y, S, L^2, int lambda x)
  struct Stage {
    Vec dy;
    double ds, dlsq;
    Vec dxbar;
  };
  auto deriv = [&](double t, const Vec& y, Stage& out, Vec& x_scratch, Vec& scaled) {
    double eta = sched.eta(t), lam = sched.lambda(t);
    for (int i = 0; i < n; ++i) scaled[i] = eta * y[i];
    p.geom.mirror(scaled, x_scratch);
    p.op.value(x_scratch, out.dy);
    for (int i = 0; i < n; ++i) {
      out.dxbar[i] = lam * x_scratch[i];
      out.dy[i] *= -lam;
    }
    out.ds = lam;
    out.dlsq = lam * lam;
  };

  Stage k1{Vec(n), 0, 0, Vec(n)}, k2 = k1, k3 = k1, k4 = k1;
  Vec ytmp(n), xs(n), scaled(n);

  try {
    deriv(t0, st.y, k1, xs, scaled);
    for (int i = 0; i < n; ++i) ytmp[i] = st.y[i] + 0.5 * dt * k1.dy[i];
    deriv(t0 + 0.5 * dt, ytmp, k2, xs, scaled);
    for (int i = 0; i < n; ++i) ytmp[i] = st.y[i] + 0.5 * dt * k2.dy[i];
    deriv(t0 + 0.5 * dt, ytmp, k3, xs, scaled);
    for (int i = 0; i < n; ++i) ytmp[i] = st.y[i] + dt * k3.dy[i];
    deriv(t1, ytmp, k4, xs, scaled);
  } catch (const NumericInputError&) {
    throw NumericDivergence(t0);
  }

  const double w = dt / 6.0;
  for (int i = 0; i < n; ++i) {
    st.y[i] += w * (k1.dy[i] + 2.0 * k2.dy[i] + 2.0 * k3.dy[i] + k4.dy[i]);
    st.xbar_accum[i] += w * (k1.dxbar[i] + 2.0 * k2.dxbar[i] + 2.0 * k3.dxbar[i] + k4.dxbar[i]);
  }
  st.s_accum += w * (k1.ds + 2.0 * k2.ds + 2.0 * k3.ds + k4.ds);
  st.lsq_accum += w * (k1.dlsq + 2.0 * k2.dlsq + 2.0 * k3.dlsq + k4.dlsq);
  refresh_primal(p.geom, sched, t1, st.y, st.x, scaled);
  st.t = t1;
  ++st.step_index;
  check_finite(st, t0);
}

void sde_step(const VIProblem& p, const Schedule& sched, const NoiseModel& nm,
              TrajectoryState& st, double dt, const GaussianStream& gs, int refine) {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be > 0");
  if (refine < 1) throw std::invalid_argument("noise_refine must be >= 1");
  const int n = p.dim();
  const double t0 = st.t;
  const double t1 = st.t + dt;

  Vec v(n);
  p.op.value(st.x, v);

  const double w = sched.lambda(t0) * dt;
  const double s = sched.lambda(t0) * std::sqrt(dt);

  Vec diff(n, 0.0);
  if (!nm.is_zero()) {
    const int d = nm.cols();
    Vec xi(d, 0.0);
    const double inv_sqrt_r = 1.0 / std::sqrt(static_cast<double>(refine));
    for (int sub = 0; sub < refine; ++sub) {
      uint64_t fine = st.step_index * static_cast<uint64_t>(refine) + sub;
      for (int j = 0; j < d; ++j)
        xi[j] += gs.normal(fine * static_cast<uint64_t>(d) + static_cast<uint64_t>(j));
    }
    for (int j = 0; j < d; ++j) xi[j] *= inv_sqrt_r;
    nm.apply(st.x, t0, xi, diff);
  }

  for (int i = 0; i < n; ++i) st.y[i] -= w * v[i] + s * diff[i];
  if (!all_finite(st.y)) throw NumericDivergence(t0);

  Vec x_prev = st.x;
  Vec scratch(n);
  refresh_primal(p.geom, sched, t1, st.y, st.x, scratch);

  const double l0 = sched.lambda(t0), l1 = sched.lambda(t1);
  st.s_accum += 0.5 * dt * (l0 + l1);
  st.lsq_accum += 0.5 * dt * (l0 * l0 + l1 * l1);
  for (int i = 0; i < n; ++i) st.xbar_accum[i] += 0.5 * dt * (l0 * x_prev[i] + l1 * st.x[i]);
  st.t = t1;
  ++st.step_index;
  check_finite(st, t0);
}

std::pair<Vec, Vec> discrete_dual_averaging_step(const VIProblem& p, const Vec& y, const Vec& x,
                                                 double lam_t, double eta_next) {
  if (!(lam_t > 0.0) || !(eta_next > 0.0))
    throw std::invalid_argument("weights must be positive");
  const int n = p.dim();
  Vec v(n);
  p.op.value(x, v);
  Vec y_next(n), scaled(n);
  for (int i = 0; i < n; ++i) {
    y_next[i] = y[i];
    y_next[i] -= lam_t * v[i];
    scaled[i] = eta_next * y_next[i];
  }
  Vec x_next = p.geom.mirror(scaled);
  return {std::move(y_next), std::move(x_next)};
}

std::vector<double> build_sample_grid(const SimConfig& cfg) {
  if (!(cfg.horizon > 0.0)) throw std::invalid_argument("horizon must be > 0");
  if (!(cfg.dt > 0.0)) throw std::invalid_argument("dt must be > 0");
  const double dt = cfg.dt;
  auto snap = [dt](double t) { return std::round(t / dt) * dt; };

  std::vector<double> grid;
  if (!cfg.grid.explicit_times.empty()) {
    for (double t : cfg.grid.explicit_times) grid.push_back(snap(t));
  } else {
    double t0 = cfg.grid.t0 > 0.0 ? cfg.grid.t0 : std::max(10.0 * dt, cfg.horizon / 100.0);
    t0 = std::min(t0, cfg.horizon);
    const double decades = std::log10(cfg.horizon / t0);
    const int npts = std::max(1, static_cast<int>(std::ceil(decades * cfg.grid.per_decade)));
    for (int k = 0; k <= npts; ++k) {
      double t = t0 * std::pow(cfg.horizon / t0, static_cast<double>(k) / npts);
      grid.push_back(snap(t));
    }
    grid.push_back(snap(cfg.horizon));
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  // drop times outside (0, horizon] except an explicit 0
  std::vector<double> out;
  for (double t : grid)
    if (t >= 0.0 && t <= snap(cfg.horizon) + 0.5 * dt) out.push_back(t);
  if (out.empty()) throw std::invalid_argument("sample grid is empty");
  return out;
}

TrajectoryRecord simulate(const VIProblem& p, const Schedule& sched, const NoiseModel& nm,
                          const SimConfig& cfg) {
  const int n = p.dim();
  if (!nm.is_zero() && nm.rows() != n)
    throw std::invalid_argument("noise model dimension does not match the problem");

  TrajectoryRecord rec;
  rec.base_seed = cfg.base_seed;
  rec.stream = cfg.stream;

  std::vector<double> grid = build_sample_grid(cfg);
  const double dt = cfg.dt;
  const uint64_t total_steps = static_cast<uint64_t>(std::llround(cfg.horizon / dt));
  if (total_steps < 1) throw std::invalid_argument("dt larger than the horizon");

  GapEvaluator gap_eval(p);
  std::optional<Vec> ref;
  if (p.known_solution)
    ref = *p.known_solution;
  else if (p.op.kind() == OperatorKind::strongly_monotone_toy)
    ref = p.op.toy_solution();

  TrajectoryState st = make_initial_state(p.geom, sched, cfg.y0);
  GaussianStream gs(cfg.base_seed, cfg.stream);

  size_t gi = 0;
  Vec xbar(n), scaled(n);
  auto emit = [&](const TrajectoryState& s) {
    TrajectorySample smp;
    smp.t = s.t;
    smp.x = s.x;
    if (s.s_accum > 0.0) {
      for (int i = 0; i < n; ++i) xbar[i] = s.xbar_accum[i] / s.s_accum;
    } else {
      xbar = s.x;
    }
    smp.xbar = xbar;
    if (cfg.record_y) smp.y = s.y;
    smp.gap_x = solution_gap(p, gap_eval, s.x);
    smp.gap_xbar = solution_gap(p, gap_eval, xbar);
    smp.s_accum = s.s_accum;
    smp.lsq_accum = s.lsq_accum;
    if (ref) {
      double eta = sched.eta(s.t);
      for (int i = 0; i < n; ++i) scaled[i] = eta * s.y[i];
      smp.fenchel = p.geom.fenchel(*ref, scaled);
    } else {
      smp.fenchel = std::numeric_limits<double>::quiet_NaN();
    }
    rec.samples.push_back(std::move(smp));
  };

  if (gi < grid.size() && grid[gi] <= 0.0) {
    emit(st);
    ++gi;
  }

  try {
    for (uint64_t k = 0; k < total_steps; ++k) {
      st.t = static_cast<double>(k) * dt;  // keep the clock exact
      st.step_index = k;
      if (nm.is_zero())
        det_step(p, sched, st, dt, cfg.det_scheme);
      else
        sde_step(p, sched, nm, st, dt, gs, cfg.noise_refine);
      double t_now = static_cast<double>(k + 1) * dt;
      st.t = t_now;
      while (gi < grid.size() && grid[gi] <= t_now + 0.25 * dt) {
        emit(st);
        ++gi;
      }
    }
  } catch (const NumericDivergence& e) {
    rec.failed = true;
    rec.failure_t = e.last_valid_t;
  }

  rec.t_final = st.t;
  rec.x_final = st.x;
  rec.y_final = st.y;
  if (st.s_accum > 0.0) {
    rec.xbar_final.resize(n);
    for (int i = 0; i < n; ++i) rec.xbar_final[i] = st.xbar_accum[i] / st.s_accum;
  } else {
    rec.xbar_final = st.x;
  }
  return rec;
}

std::string format_double(double v) {
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_csv(std::ostream& os, const TrajectoryRecord& rec, bool with_seed_column) {
  if (!rec.config_echo.empty()) os << "# " << rec.config_echo << "\n";
  if (rec.failed) os << "# FAILED at t=" << format_double(rec.failure_t) << "\n";
  const size_t n = rec.samples.empty() ? 0 : rec.samples.front().x.size();
  if (with_seed_column) os << "seed,";
  os << "t";
  for (size_t i = 1; i <= n; ++i) os << ",x_" << i;
  for (size_t i = 1; i <= n; ++i) os << ",xbar_" << i;
  os << ",gap_x,gap_xbar,S_t,Lsq_t\n";
  for (const auto& s : rec.samples) {
    if (with_seed_column) os << rec.stream << ",";
    os << format_double(s.t);
    for (double v : s.x) os << "," << format_double(v);
    for (double v : s.xbar) os << "," << format_double(v);
    os << "," << format_double(s.gap_x) << "," << format_double(s.gap_xbar) << ","
       << format_double(s.s_accum) << "," << format_double(s.lsq_accum) << "\n";
  }
}

std::string to_csv(const TrajectoryRecord& rec) {
  std::ostringstream os;
  write_csv(os, rec);
  return os.str();
}

}  // namespace mdvi
