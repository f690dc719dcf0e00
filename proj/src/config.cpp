#include "mdvi/config.hpp"

#include <json.hpp>

#include <cmath>
#include <set>

namespace mdvi {

using nlohmann::json;

namespace {

Mat parse_matrix(const json& j, const std::string& field, std::vector<std::string>& errors) {
  Mat m;
  if (!j.is_array() || j.empty() || !j[0].is_array()) {
    errors.push_back("problem." + field + " must be a nonempty array of rows");
    return m;
  }
  m.rows = static_cast<int>(j.size());
  m.cols = static_cast<int>(j[0].size());
  m.a.reserve(static_cast<size_t>(m.rows) * m.cols);
  for (const auto& row : j) {
    if (!row.is_array() || static_cast<int>(row.size()) != m.cols) {
      errors.push_back("problem." + field + " rows must all have the same length");
      return Mat();
    }
    for (const auto& v : row) m.a.push_back(v.get<double>());
  }
  return m;
}

Vec parse_vector(const json& j) {
  Vec v;
  for (const auto& e : j) v.push_back(e.get<double>());
  return v;
}

std::optional<Domain> parse_domain(const json& j, std::vector<std::string>& errors) {
  if (!j.is_object() || !j.contains("kind")) {
    errors.push_back("problem.domain must be an object with a \"kind\"");
    return std::nullopt;
  }
  std::string kind = j["kind"].get<std::string>();
  try {
    if (kind == "simplex") return Domain::simplex(j.at("dim").get<int>());
    if (kind == "box")
      return Domain::box(j.at("dim").get<int>(), j.value("lo", 0.0), j.value("hi", 1.0));
    if (kind == "ball") {
      int n = j.at("dim").get<int>();
      Vec center = j.contains("center") ? parse_vector(j["center"]) : Vec(n, 0.0);
      return Domain::ball(n, j.value("radius", 1.0), std::move(center));
    }
    if (kind == "product") {
      std::vector<Domain> fs;
      for (const auto& f : j.at("factors")) {
        auto d = parse_domain(f, errors);
        if (!d) return std::nullopt;
        fs.push_back(std::move(*d));
      }
      return Domain::product(std::move(fs));
    }
  } catch (const std::exception& e) {
    errors.push_back(std::string("problem.domain: ") + e.what());
    return std::nullopt;
  }
  errors.push_back("problem.domain.kind must be simplex | box | ball | product");
  return std::nullopt;
}

json domain_echo(const Domain& d) {
  json j;
  switch (d.kind()) {
    case DomainKind::simplex:
      j["kind"] = "simplex";
      j["dim"] = d.dim();
      break;
    case DomainKind::box:
      j["kind"] = "box";
      j["dim"] = d.dim();
      j["lo"] = d.lo();
      j["hi"] = d.hi();
      break;
    case DomainKind::ball:
      j["kind"] = "ball";
      j["dim"] = d.dim();
      j["radius"] = d.radius();
      j["center"] = d.center();
      break;
    case DomainKind::product: {
      j["kind"] = "product";
      json fs = json::array();
      for (const auto& f : d.factors()) fs.push_back(domain_echo(f));
      j["factors"] = fs;
      break;
    }
  }
  return j;
}

json matrix_echo(const Mat& m) {
  json rows = json::array();
  for (int i = 0; i < m.rows; ++i) {
    json row = json::array();
    for (int j2 = 0; j2 < m.cols; ++j2) row.push_back(m(i, j2));
    rows.push_back(row);
  }
  return rows;
}

std::optional<MonotoneOperator> build_operator(const json& jp, std::vector<std::string>& errors) {
  if (!jp.contains("kind")) {
    errors.push_back("problem.kind is required");
    return std::nullopt;
  }
  std::string kind = jp["kind"].get<std::string>();
  try {
    if (kind == "matrix_game") {
      if (!jp.contains("matrix")) {
        errors.push_back("problem.matrix is required for matrix_game");
        return std::nullopt;
      }
      Mat M = parse_matrix(jp["matrix"], "matrix", errors);
      if (M.empty()) return std::nullopt;
      return MonotoneOperator::matrix_game(std::move(M));
    }
    if (kind == "affine" || kind == "quadratic_gradient") {
      auto dom = parse_domain(jp.value("domain", json()), errors);
      if (!dom) return std::nullopt;
      const char* mat_field = kind == "affine" ? "A" : "P";
      const char* off_field = kind == "affine" ? "b" : "q";
      if (!jp.contains(mat_field)) {
        errors.push_back(std::string("problem.") + mat_field + " is required for " + kind);
        return std::nullopt;
      }
      Mat A = parse_matrix(jp[mat_field], mat_field, errors);
      if (A.empty()) return std::nullopt;
      Vec b = jp.contains(off_field) ? parse_vector(jp[off_field]) : Vec();
      return kind == "affine"
                 ? MonotoneOperator::affine(std::move(A), std::move(b), std::move(*dom))
                 : MonotoneOperator::quadratic_gradient(std::move(A), std::move(b),
                                                        std::move(*dom));
    }
    if (kind == "strongly_monotone_toy") {
      auto dom = parse_domain(jp.value("domain", json()), errors);
      if (!dom) return std::nullopt;
      if (!jp.contains("x_star")) {
        errors.push_back("problem.x_star is required for strongly_monotone_toy");
        return std::nullopt;
      }
      Vec xs = parse_vector(jp["x_star"]);
      Mat R = jp.contains("rotation") ? parse_matrix(jp["rotation"], "rotation", errors) : Mat();
      return MonotoneOperator::strongly_monotone_toy(jp.value("gamma", 1.0), std::move(xs),
                                                     std::move(R), std::move(*dom));
    }
    if (kind == "convex_game") {
      if (!jp.contains("players") || !jp["players"].is_array()) {
        errors.push_back("problem.players is required for convex_game");
        return std::nullopt;
      }
      if (jp["players"].size() != 2) {
        errors.push_back("convex_game supports exactly 2 players (closed-form monotonicity); " +
                         std::to_string(jp["players"].size()) + " given");
        return std::nullopt;
      }
      const json& p1 = jp["players"][0];
      const json& p2 = jp["players"][1];
      auto d1 = parse_domain(p1.value("domain", json()), errors);
      auto d2 = parse_domain(p2.value("domain", json()), errors);
      if (!d1 || !d2) return std::nullopt;
      Mat A1 = parse_matrix(p1.at("A"), "players[0].A", errors);
      Mat B1 = parse_matrix(p1.at("B"), "players[0].B", errors);
      Mat A2 = parse_matrix(p2.at("A"), "players[1].A", errors);
      Mat B2 = parse_matrix(p2.at("B"), "players[1].B", errors);
      Vec c1 = p1.contains("c") ? parse_vector(p1["c"]) : Vec();
      Vec c2 = p2.contains("c") ? parse_vector(p2["c"]) : Vec();
      if (A1.empty() || B1.empty() || A2.empty() || B2.empty()) return std::nullopt;
      return MonotoneOperator::convex_game(std::move(A1), std::move(B1), std::move(c1),
                                           std::move(A2), std::move(B2), std::move(c2),
                                           std::move(*d1), std::move(*d2));
    }
  } catch (const std::exception& e) {
    errors.push_back(std::string("problem: ") + e.what() + " (H1 requires a Lipschitz monotone map)");
    return std::nullopt;
  }
  errors.push_back("problem.kind must be one of matrix_game | affine | quadratic_gradient | "
                   "strongly_monotone_toy | convex_game");
  return std::nullopt;
}

std::optional<Geometry> build_geometry(const json& j, const Domain& dom,
                                       std::vector<std::string>& errors) {
  std::vector<std::string> keys;
  if (j.is_string())
    keys.push_back(j.get<std::string>());
  else if (j.is_array())
    for (const auto& k : j) keys.push_back(k.get<std::string>());
  else {
    errors.push_back("geometry must be a key or an array of per-factor keys "
                     "(euclidean | entropy | fermi_dirac)");
    return std::nullopt;
  }

  std::vector<Domain> factor_domains;
  if (dom.kind() == DomainKind::product)
    factor_domains = dom.factors();
  else
    factor_domains.push_back(dom);

  if (keys.size() == 1 && factor_domains.size() > 1)
    keys.assign(factor_domains.size(), keys[0]);
  if (keys.size() != factor_domains.size()) {
    errors.push_back("geometry needs one key per domain factor (" +
                     std::to_string(factor_domains.size()) + " factors, " +
                     std::to_string(keys.size()) + " keys)");
    return std::nullopt;
  }

  std::vector<DistanceGenerator> parts;
  for (size_t i = 0; i < keys.size(); ++i) {
    try {
      parts.emplace_back(dgf_kind_from_string(keys[i]), factor_domains[i]);
    } catch (const std::exception& e) {
      errors.push_back("geometry[" + std::to_string(i) + "]: " + e.what());
    }
  }
  if (parts.size() != factor_domains.size()) return std::nullopt;
  return Geometry(std::move(parts));
}

std::optional<NoiseModel> build_noise(const json& j, int n, std::vector<std::string>& errors) {
  if (j.is_null()) return NoiseModel::zero(n);
  std::string kind = j.value("kind", "zero");
  try {
    if (kind == "zero") return NoiseModel::zero(n);
    if (kind == "constant") {
      if (j.contains("matrix")) {
        Mat m = parse_matrix(j["matrix"], "noise.matrix", errors);
        if (m.empty()) return std::nullopt;
        if (m.rows != n) {
          errors.push_back("noise.matrix must have one row per primal dimension (H3)");
          return std::nullopt;
        }
        return NoiseModel::constant_volatility(std::move(m));
      }
      double s = j.value("sigma_star", 0.0);
      if (!(s >= 0.0)) {
        errors.push_back("noise.sigma_star must be >= 0 (H3 uniform bound)");
        return std::nullopt;
      }
      if (s == 0.0) return NoiseModel::zero(n);
      // scaled identity with Frobenius norm exactly sigma_star
      Mat m(n, n);
      for (int i = 0; i < n; ++i) m(i, i) = s / std::sqrt(static_cast<double>(n));
      return NoiseModel::constant_volatility(std::move(m));
    }
    if (kind == "state_scaled") {
      if (!j.contains("base")) {
        errors.push_back("noise.base matrix is required for state_scaled (H3 Lipschitz form)");
        return std::nullopt;
      }
      Mat m = parse_matrix(j["base"], "noise.base", errors);
      if (m.empty()) return std::nullopt;
      return NoiseModel::state_scaled(std::move(m));
    }
    if (kind == "decaying") {
      std::string beta = j.value("beta", "log_decay");
      if (beta != "log_decay") {
        errors.push_back("noise.beta must be log_decay (H4 admits a logarithmic decay rate)");
        return std::nullopt;
      }
      return NoiseModel::decaying(n, j.value("sigma0", 0.0));
    }
  } catch (const std::exception& e) {
    errors.push_back(std::string("noise: ") + e.what());
    return std::nullopt;
  }
  errors.push_back("noise.kind must be zero | constant | state_scaled | decaying");
  return std::nullopt;
}

}  // namespace

ConfigResult validate_config(const std::string& json_text) {
  ConfigResult result;
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    result.errors.push_back(std::string("parse error: ") + e.what());
    return result;
  }

  auto& errors = result.errors;
  RunConfig cfg;

  static const std::set<std::string> kExperiments{"check", "simulate", "rates", "ldp",
                                                  "smallnoise"};
  cfg.experiment = j.value("experiment", "");
  if (!kExperiments.count(cfg.experiment))
    errors.push_back("experiment must be one of check | simulate | rates | ldp | smallnoise");

  cfg.output_dir = j.value("output", "out");
  cfg.check_seed = j.value("check_seed", static_cast<uint64_t>(1234));

  // problem + geometry
  std::optional<MonotoneOperator> op;
  if (j.contains("problem")) {
    op = build_operator(j["problem"], errors);
  } else if (cfg.experiment != "check") {
    errors.push_back("problem is required for experiment \"" + cfg.experiment + "\"");
  }
  if (op) {
    json jg = j.contains("geometry") ? j["geometry"]
              : op->kind() == OperatorKind::matrix_game ? json("entropy")
                                                        : json("euclidean");
    auto geom = build_geometry(jg, op->domain(), errors);
    if (geom) {
      std::optional<Vec> known;
      if (j["problem"].contains("known_solution"))
        known = parse_vector(j["problem"]["known_solution"]);
      try {
        cfg.problem.emplace(std::move(*op), std::move(*geom), std::move(known));
      } catch (const std::exception& e) {
        errors.push_back(std::string("problem: ") + e.what());
      }
    }
  }

  // schedule
  {
    json js = j.value("schedule", json{{"kind", "constant"}, {"lambda", 1.0}, {"eta", 1.0}});
    std::string kind = js.value("kind", "constant");
    try {
      if (kind == "constant") {
        cfg.schedule = Schedule::constant(js.value("lambda", 1.0), js.value("eta", 1.0));
      } else if (kind == "power") {
        double a = js.value("a", 0.0), b = js.value("b", 0.0);
        if (a < 0.0 || a > 1.0)
          errors.push_back("schedule.a must lie in [0,1] (admissible power-schedule range)");
        if (b < 0.0 || b > 1.0)
          errors.push_back("schedule.b must lie in [0,1] (admissible power-schedule range)");
        if (a >= 0.0 && a <= 1.0 && b >= 0.0 && b <= 1.0) cfg.schedule = Schedule::power(a, b);
      } else {
        errors.push_back("schedule.kind must be constant | power "
                         "(H2 requires positive, C1, nonincreasing weights)");
      }
    } catch (const std::exception& e) {
      errors.push_back(std::string("schedule: ") + e.what() + " (H2)");
    }
  }

  // integrator
  {
    json ji = j.value("integrator", json::object());
    cfg.sim.dt = ji.value("dt", 1e-3);
    cfg.sim.horizon = ji.value("horizon", 0.0);
    if (!(cfg.sim.dt > 0.0)) errors.push_back("integrator.dt must be > 0");
    if (cfg.experiment != "check" && !(cfg.sim.horizon > 0.0))
      errors.push_back("integrator.horizon must be > 0");
    cfg.sim.grid.per_decade = ji.value("samples_per_decade", 40);
    if (cfg.sim.grid.per_decade < 1) errors.push_back("integrator.samples_per_decade must be >= 1");
    cfg.sim.grid.t0 = ji.value("t0", 0.0);
    if (ji.contains("sample_times")) {
      cfg.sim.grid.explicit_times = parse_vector(ji["sample_times"]);
      for (size_t k = 1; k < cfg.sim.grid.explicit_times.size(); ++k) {
        double gap = cfg.sim.grid.explicit_times[k] - cfg.sim.grid.explicit_times[k - 1];
        if (gap < cfg.sim.dt - 1e-12)
          errors.push_back("integrator.dt must not exceed the sample spacing");
      }
    }
    std::string scheme = ji.value("scheme", "rk4");
    if (scheme == "rk4")
      cfg.sim.det_scheme = DetScheme::rk4;
    else if (scheme == "euler")
      cfg.sim.det_scheme = DetScheme::euler;
    else
      errors.push_back("integrator.scheme must be rk4 | euler");
    cfg.sim.noise_refine = ji.value("noise_refine", 1);
    if (cfg.sim.noise_refine < 1) errors.push_back("integrator.noise_refine must be >= 1");
    if (ji.contains("y0")) cfg.sim.y0 = parse_vector(ji["y0"]);
    if (cfg.problem && !cfg.sim.y0.empty() &&
        cfg.sim.y0.size() != static_cast<size_t>(cfg.problem->dim()))
      errors.push_back("integrator.y0 dimension does not match the problem");
  }

  // noise
  if (cfg.problem) {
    auto nm = build_noise(j.value("noise", json()), cfg.problem->dim(), errors);
    if (nm) cfg.noise = std::move(*nm);
  } else if (j.contains("noise")) {
    std::vector<std::string> scratch;
    build_noise(j["noise"], 1, scratch);  // syntax-check only
    for (auto& e : scratch) errors.push_back(e);
  }

  // ensemble
  {
    json je = j.value("ensemble", json::object());
    cfg.ensemble.size = je.value("size", 1);
    cfg.ensemble.base_seed = je.value("base_seed", static_cast<uint64_t>(0));
    cfg.ensemble.workers = je.value("workers", 0);
    if (cfg.ensemble.size < 1) errors.push_back("ensemble.size must be >= 1");
  }
  cfg.sim.base_seed = cfg.ensemble.base_seed;

  // experiment-specific blocks
  if (j.contains("ldp")) {
    cfg.t_eval = j["ldp"].value("t_eval", cfg.sim.horizon);
    if (j["ldp"].contains("delta_grid")) cfg.delta_grid = parse_vector(j["ldp"]["delta_grid"]);
  } else {
    cfg.t_eval = cfg.sim.horizon;
  }
  if (cfg.experiment == "ldp") {
    if (cfg.ensemble.size < 100) errors.push_back("ldp requires ensemble.size >= 100");
    if (!cfg.sim.y0.empty())
      errors.push_back("ldp requires the default (0,0) initialization");
    if (cfg.t_eval > cfg.sim.horizon) errors.push_back("ldp.t_eval must not exceed the horizon");
  }
  if (j.contains("rates")) {
    if (j["rates"].contains("window")) {
      Vec w = parse_vector(j["rates"]["window"]);
      if (w.size() == 2 && w[0] > 0.0 && w[1] > w[0]) {
        cfg.rate_window_lo = w[0];
        cfg.rate_window_hi = w[1];
      } else {
        errors.push_back("rates.window must be [t_min, t_max] with 0 < t_min < t_max");
      }
    }
  }
  if (j.contains("smallnoise")) {
    cfg.sn_threshold = j["smallnoise"].value("threshold", 0.05);
    cfg.sn_min_fraction = j["smallnoise"].value("min_fraction", 0.95);
    cfg.sn_horizon2 = j["smallnoise"].value("horizon2", 0.0);
  }
  if (cfg.experiment == "smallnoise") {
    if (cfg.noise.kind() != NoiseModel::Kind::decaying)
      errors.push_back("smallnoise requires noise.kind = decaying (H4 vanishing noise)");
    bool const_schedule = cfg.schedule && cfg.schedule->kind() == Schedule::Kind::constant &&
                          cfg.schedule->lambda(0.0) == 1.0 && cfg.schedule->eta(0.0) == 1.0;
    bool unit_power = cfg.schedule && cfg.schedule->kind() == Schedule::Kind::power &&
                      cfg.schedule->a() == 0.0 && cfg.schedule->b() == 0.0;
    if (!const_schedule && !unit_power)
      errors.push_back("smallnoise requires lambda = eta = 1");
  }

  if (!errors.empty()) return result;

  // normalized echo
  json echo;
  echo["experiment"] = cfg.experiment;
  echo["output"] = cfg.output_dir;
  if (j.contains("problem")) {
    json jp;
    const auto& op2 = cfg.problem->op;
    switch (op2.kind()) {
      case OperatorKind::matrix_game:
        jp["kind"] = "matrix_game";
        jp["matrix"] = matrix_echo(op2.game_matrix());
        break;
      case OperatorKind::affine:
        jp["kind"] = "affine";
        jp["A"] = matrix_echo(op2.affine_matrix());
        jp["b"] = op2.affine_offset();
        jp["domain"] = domain_echo(op2.domain());
        break;
      case OperatorKind::quadratic_gradient:
        jp["kind"] = "quadratic_gradient";
        jp["P"] = matrix_echo(op2.affine_matrix());
        jp["q"] = op2.affine_offset();
        jp["domain"] = domain_echo(op2.domain());
        break;
      case OperatorKind::strongly_monotone_toy: {
        jp["kind"] = "strongly_monotone_toy";
        jp["gamma"] = op2.strong_modulus();
        jp["x_star"] = op2.toy_solution();
        Mat R = op2.affine_matrix();
        for (int i = 0; i < R.rows; ++i) R(i, i) -= op2.strong_modulus();
        jp["rotation"] = matrix_echo(R);
        jp["domain"] = domain_echo(op2.domain());
        break;
      }
      case OperatorKind::convex_game:
        jp["kind"] = "convex_game";
        jp["A"] = matrix_echo(op2.affine_matrix());
        jp["b"] = op2.affine_offset();
        jp["domain"] = domain_echo(op2.domain());
        break;
    }
    if (cfg.problem->known_solution) jp["known_solution"] = *cfg.problem->known_solution;
    echo["problem"] = jp;
    json gkeys = json::array();
    for (const auto& part : cfg.problem->geom.parts()) gkeys.push_back(to_string(part.kind()));
    echo["geometry"] = gkeys;
  }
  {
    json js;
    if (cfg.schedule->kind() == Schedule::Kind::constant) {
      js["kind"] = "constant";
      js["lambda"] = cfg.schedule->lambda(0.0);
      js["eta"] = cfg.schedule->eta(0.0);
    } else {
      js["kind"] = "power";
      js["a"] = cfg.schedule->a();
      js["b"] = cfg.schedule->b();
    }
    echo["schedule"] = js;
  }
  {
    json jn;
    switch (cfg.noise.kind()) {
      case NoiseModel::Kind::zero:
        jn["kind"] = "zero";
        break;
      case NoiseModel::Kind::constant_volatility:
        jn["kind"] = "constant";
        jn["sigma_star"] = cfg.noise.sigma_star();
        break;
      case NoiseModel::Kind::state_scaled:
        jn["kind"] = "state_scaled";
        jn["sigma_star"] = cfg.noise.sigma_star();
        jn["lipschitz"] = cfg.noise.lipschitz();
        break;
      case NoiseModel::Kind::decaying:
        jn["kind"] = "decaying";
        jn["beta"] = "log_decay";
        jn["sigma0"] = cfg.noise.sigma0();
        break;
    }
    echo["noise"] = jn;
  }
  {
    json ji;
    ji["dt"] = cfg.sim.dt;
    ji["horizon"] = cfg.sim.horizon;
    ji["samples_per_decade"] = cfg.sim.grid.per_decade;
    ji["t0"] = cfg.sim.grid.t0;
    ji["scheme"] = cfg.sim.det_scheme == DetScheme::rk4 ? "rk4" : "euler";
    ji["noise_refine"] = cfg.sim.noise_refine;
    if (!cfg.sim.grid.explicit_times.empty()) ji["sample_times"] = cfg.sim.grid.explicit_times;
    if (!cfg.sim.y0.empty()) ji["y0"] = cfg.sim.y0;
    echo["integrator"] = ji;
  }
  echo["ensemble"] = {{"size", cfg.ensemble.size},
                      {"base_seed", cfg.ensemble.base_seed},
                      {"workers", cfg.ensemble.workers}};
  if (cfg.experiment == "ldp")
    echo["ldp"] = {{"t_eval", cfg.t_eval}, {"delta_grid", cfg.delta_grid}};
  if (cfg.experiment == "rates" && cfg.rate_window_lo > 0.0)
    echo["rates"] = {{"window", Vec{cfg.rate_window_lo, cfg.rate_window_hi}}};
  if (cfg.experiment == "smallnoise")
    echo["smallnoise"] = {{"threshold", cfg.sn_threshold},
                          {"min_fraction", cfg.sn_min_fraction},
                          {"horizon2", cfg.sn_horizon2}};
  if (cfg.experiment == "check") echo["check_seed"] = cfg.check_seed;
  cfg.echo = echo.dump();

  result.config = std::move(cfg);
  return result;
}

}  // namespace mdvi
