#include <doctest.h>

#include <string>

#include "mdvi/config.hpp"

using namespace mdvi;

namespace {

const char* kLdpConfig = R"({
  "experiment": "ldp",
  "output": "out/ldp",
  "problem": { "kind": "matrix_game", "matrix": [[1, -1], [-1, 1]] },
  "geometry": ["entropy", "entropy"],
  "schedule": { "kind": "power", "a": 0.25, "b": 0.25 },
  "noise": { "kind": "constant", "sigma_star": 0.5 },
  "integrator": { "dt": 0.001, "horizon": 50.0 },
  "ensemble": { "size": 500, "base_seed": 42 },
  "ldp": { "t_eval": 50.0, "delta_grid": [1, 2, 3] }
})";

bool mentions(const std::vector<std::string>& errors, const std::string& needle) {
  for (const auto& e : errors)
    if (e.find(needle) != std::string::npos) return true;
  return false;
}

}  // namespace

TEST_CASE("valid ldp config is accepted and echoes canonically") {
  ConfigResult r = validate_config(kLdpConfig);
  REQUIRE(r.ok());
  const RunConfig& cfg = *r.config;
  CHECK(cfg.experiment == "ldp");
  CHECK(cfg.problem->op.kind() == OperatorKind::matrix_game);
  CHECK(cfg.problem->geom.parts().size() == 2);
  CHECK(cfg.schedule->a() == 0.25);
  CHECK(cfg.noise.sigma_star() == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(cfg.ensemble.size == 500);
  CHECK(cfg.t_eval == 50.0);
  REQUIRE(cfg.delta_grid.size() == 3);

  // round trip: validating the echo reproduces the echo
  ConfigResult r2 = validate_config(cfg.echo);
  REQUIRE(r2.ok());
  CHECK(r2.config->echo == cfg.echo);
}

TEST_CASE("power exponent outside [0,1] is rejected with the range message") {
  std::string text(kLdpConfig);
  auto pos = text.find("0.25");
  text.replace(pos, 4, "1.50");
  ConfigResult r = validate_config(text);
  CHECK_FALSE(r.ok());
  CHECK(mentions(r.errors, "a must lie in [0,1]"));
}

TEST_CASE("geometry/domain mismatch is rejected") {
  const char* text = R"({
    "experiment": "simulate",
    "problem": { "kind": "strongly_monotone_toy", "gamma": 1.0, "x_star": [0.5, 0.5],
                 "domain": {"kind": "box", "dim": 2, "lo": 0, "hi": 1} },
    "geometry": "entropy",
    "integrator": { "dt": 0.001, "horizon": 1.0 }
  })";
  ConfigResult r = validate_config(text);
  CHECK_FALSE(r.ok());
  CHECK(mentions(r.errors, "simplex"));
}

TEST_CASE("errors are aggregated rather than fail-fast") {
  const char* text = R"({
    "experiment": "ldp",
    "problem": { "kind": "matrix_game", "matrix": [[1, -1], [-1, 1]] },
    "schedule": { "kind": "power", "a": 2.0, "b": -0.5 },
    "integrator": { "dt": -1.0, "horizon": 50.0 },
    "ensemble": { "size": 10 },
    "ldp": { "t_eval": 50.0 }
  })";
  ConfigResult r = validate_config(text);
  CHECK_FALSE(r.ok());
  CHECK(r.errors.size() >= 4);
  CHECK(mentions(r.errors, "a must lie in [0,1]"));
  CHECK(mentions(r.errors, "b must lie in [0,1]"));
  CHECK(mentions(r.errors, "dt must be > 0"));
  CHECK(mentions(r.errors, "ensemble.size >= 100"));
}

TEST_CASE("parse errors carry the position") {
  ConfigResult r = validate_config("{ not json");
  CHECK_FALSE(r.ok());
  REQUIRE(r.errors.size() == 1);
  CHECK(mentions(r.errors, "parse error"));
}

TEST_CASE("hypothesis citations appear in the messages") {
  SUBCASE("noise bound message cites H3") {
    const char* text = R"({
      "experiment": "simulate",
      "problem": { "kind": "matrix_game", "matrix": [[1, -1], [-1, 1]] },
      "noise": { "kind": "constant", "sigma_star": -1.0 },
      "integrator": { "dt": 0.001, "horizon": 1.0 }
    })";
    ConfigResult r = validate_config(text);
    CHECK_FALSE(r.ok());
    CHECK(mentions(r.errors, "H3"));
  }
  SUBCASE("smallnoise without decaying noise cites H4") {
    const char* text = R"({
      "experiment": "smallnoise",
      "problem": { "kind": "strongly_monotone_toy", "gamma": 1.0, "x_star": [0.0, 0.0],
                   "domain": {"kind": "ball", "dim": 2, "radius": 1.0} },
      "noise": { "kind": "constant", "sigma_star": 0.5 },
      "integrator": { "dt": 0.001, "horizon": 10.0 }
    })";
    ConfigResult r = validate_config(text);
    CHECK_FALSE(r.ok());
    CHECK(mentions(r.errors, "H4"));
  }
  SUBCASE("unsupported schedule kinds cite H2") {
    const char* text = R"({
      "experiment": "simulate",
      "problem": { "kind": "matrix_game", "matrix": [[1, -1], [-1, 1]] },
      "schedule": { "kind": "piecewise" },
      "integrator": { "dt": 0.001, "horizon": 1.0 }
    })";
    ConfigResult r = validate_config(text);
    CHECK_FALSE(r.ok());
    CHECK(mentions(r.errors, "H2"));
  }
}

TEST_CASE("convex games beyond two players are config-rejected") {
  const char* text = R"({
    "experiment": "simulate",
    "problem": { "kind": "convex_game", "players": [
      {"A": [[1]], "B": [[0]], "domain": {"kind": "box", "dim": 1, "lo": 0, "hi": 1}},
      {"A": [[1]], "B": [[0]], "domain": {"kind": "box", "dim": 1, "lo": 0, "hi": 1}},
      {"A": [[1]], "B": [[0]], "domain": {"kind": "box", "dim": 1, "lo": 0, "hi": 1}}
    ]},
    "integrator": { "dt": 0.001, "horizon": 1.0 }
  })";
  ConfigResult r = validate_config(text);
  CHECK_FALSE(r.ok());
  CHECK(mentions(r.errors, "exactly 2 players"));
}

TEST_CASE("non-monotone problem matrices are rejected at validation") {
  const char* text = R"({
    "experiment": "simulate",
    "problem": { "kind": "affine", "A": [[-1, 0], [0, 1]],
                 "domain": {"kind": "box", "dim": 2, "lo": 0, "hi": 1} },
    "integrator": { "dt": 0.001, "horizon": 1.0 }
  })";
  ConfigResult r = validate_config(text);
  CHECK_FALSE(r.ok());
  CHECK(mentions(r.errors, "monotone"));
  CHECK(mentions(r.errors, "H1"));
}
