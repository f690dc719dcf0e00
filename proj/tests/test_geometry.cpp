#include <doctest.h>

#include <cmath>
#include <numbers>

#include "mdvi/geometry.hpp"
#include "oracles.hpp"

using namespace mdvi;

namespace {
DistanceGenerator entropy(int n) {
  return DistanceGenerator(DgfKind::gibbs_shannon, Domain::simplex(n));
}
DistanceGenerator fermi(int n) {
  return DistanceGenerator(DgfKind::fermi_dirac, Domain::box(n, 0, 1));
}
DistanceGenerator euclid(Domain d) { return DistanceGenerator(DgfKind::euclidean, std::move(d)); }
}  // namespace

TEST_CASE("eval_h on the reference points") {
  CHECK(euclid(Domain::box(2, -1, 1)).eval(Vec{0.0, 0.0}) == 0.0);
  CHECK(entropy(2).eval(Vec{0.5, 0.5}) == doctest::Approx(-std::log(2.0)).epsilon(1e-12));
  CHECK(fermi(1).eval(Vec{0.5}) == doctest::Approx(-std::log(2.0)).epsilon(1e-12));
  // boundary convention 0 log 0 = 0
  CHECK(entropy(2).eval(Vec{1.0, 0.0}) == 0.0);
  CHECK(fermi(2).eval(Vec{1.0, 0.0}) == 0.0);
}

TEST_CASE("eval_h rejects points outside the domain") {
  CHECK_THROWS_AS(entropy(2).eval(Vec{0.7, 0.7}), DomainMembershipError);
  CHECK_THROWS_AS(fermi(2).eval(Vec{1.5, 0.0}), DomainMembershipError);
}

TEST_CASE("mirror map closed forms") {
  auto g = entropy(2);
  Vec q = g.mirror(Vec{0.0, 0.0});
  CHECK(q[0] == doctest::Approx(0.5).epsilon(1e-14));
  q = g.mirror(Vec{std::log(2.0), 0.0});
  CHECK(q[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(q[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

  auto f = fermi(2);
  Vec qf = f.mirror(Vec{0.0, 3.0});
  CHECK(qf[0] == doctest::Approx(0.5));
  CHECK(qf[1] == doctest::Approx(1.0 / (1.0 + std::exp(-3.0))).epsilon(1e-14));

  CHECK_THROWS_AS(g.mirror(Vec{std::nan(""), 0.0}), NumericInputError);
}

TEST_CASE("euclidean mirror is the projection (grid oracle)") {
  auto g = euclid(Domain::simplex(2));
  Vec q = g.mirror(Vec{2.0, 0.0});
  // oracle: brute-force minimization of ||x-y||^2 over a fine simplex grid
  auto grid = oracles::simplex_grid(2, 4000);
  Vec q_oracle = oracles::grid_projection(grid, Vec{2.0, 0.0});
  CHECK(q[0] == doctest::Approx(q_oracle[0]).epsilon(1e-3));
  CHECK(q[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(q[1] == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("conjugate values") {
  CHECK(entropy(2).conjugate(Vec{0.0, 0.0}) == doctest::Approx(std::log(2.0)).epsilon(1e-14));
  CHECK(euclid(Domain::box(2, 0, 1)).conjugate(Vec{0.0, 0.0}) == 0.0);
  // log(3e) two ways
  auto g3 = entropy(3);
  Vec y{1.0, 1.0, 1.0};
  double direct = g3.conjugate(y);
  CHECK(direct == doctest::Approx(1.0 + std::log(3.0)).epsilon(1e-12));
  Vec q = g3.mirror(y);
  CHECK(direct == doctest::Approx(dot(y, q) - g3.eval(q)).epsilon(1e-12));
  // stability for large duals
  CHECK(std::isfinite(entropy(2).conjugate(Vec{900.0, -900.0})));
  CHECK(entropy(2).conjugate(Vec{900.0, -900.0}) == doctest::Approx(900.0));
}

TEST_CASE("fenchel coupling identities") {
  auto g = entropy(2);
  Vec y{0.3, -1.2};
  CHECK(g.fenchel(g.mirror(y), y) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(g.fenchel(Vec{1.0, 0.0}, Vec{0.0, 0.0}) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-12));

  auto e = euclid(Domain::box(1, 0, 1));
  // 0.5*0.04 + h*(0.5) - 0.1 with h*(0.5) = 0.125; cross-check on a grid
  double f = e.fenchel(Vec{0.2}, Vec{0.5});
  CHECK(f == doctest::Approx(0.045).epsilon(1e-12));
  auto grid = oracles::box_grid(1, 0, 1, 100000);
  double conj_oracle = oracles::grid_conjugate(grid, [](const Vec& x) { return 0.5 * x[0] * x[0]; },
                                               Vec{0.5});
  CHECK(e.conjugate(Vec{0.5}) == doctest::Approx(conj_oracle).epsilon(1e-8));
}

TEST_CASE("depth against grid/vertex search") {
  // gibbs-shannon n=4: oracle over grid + vertices
  {
    auto g = entropy(4);
    auto grid = oracles::simplex_grid(4, 40);
    auto mm = oracles::scan(grid, [&](const Vec& x) { return g.eval(x); });
    CHECK(g.depth() == doctest::Approx(std::log(4.0)).epsilon(1e-12));
    CHECK(g.depth() == doctest::Approx(mm.max - mm.min).epsilon(1e-2));
    CHECK(g.depth() >= mm.max - mm.min - 1e-12);  // grid search can only undershoot
  }
  {
    auto f = fermi(3);
    auto grid = oracles::box_grid(3, 0, 1, 20);
    auto mm = oracles::scan(grid, [&](const Vec& x) { return f.eval(x); });
    CHECK(f.depth() == doctest::Approx(3.0 * std::numbers::ln2).epsilon(1e-12));
    CHECK(f.depth() == doctest::Approx(mm.max - mm.min).epsilon(1e-2));
  }
  {
    auto e = euclid(Domain::ball(2, 1.0));
    auto grid = oracles::disk_grid(1.0, Vec{0.0, 0.0}, 60, 120);
    auto mm = oracles::scan(grid, [&](const Vec& x) { return e.eval(x); });
    CHECK(e.depth() == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(e.depth() == doctest::Approx(mm.max - mm.min).epsilon(1e-2));
  }
  {
    auto e = euclid(Domain::box(2, 0, 1));
    auto grid = oracles::box_grid(2, 0, 1, 50);
    auto mm = oracles::scan(grid, [&](const Vec& x) { return e.eval(x); });
    CHECK(e.depth() == doctest::Approx(mm.max - mm.min).epsilon(1e-3));
  }
}

TEST_CASE("prox centers") {
  Vec c = entropy(3).prox_center();
  for (double v : c) CHECK(v == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  c = fermi(2).prox_center();
  for (double v : c) CHECK(v == doctest::Approx(0.5).epsilon(1e-14));
  c = euclid(Domain::box(2, 0, 1)).prox_center();
  for (double v : c) CHECK(v == 0.0);
}

TEST_CASE("gradient of the conjugate is the mirror map (finite differences)") {
  Rng rng(11);
  for (auto g : {entropy(3), fermi(2), euclid(Domain::ball(2, 1.0)), euclid(Domain::box(2, 0, 1))}) {
    const int n = g.domain().dim();
    for (int k = 0; k < 100; ++k) {
      Vec y(n);
      for (auto& v : y) v = rng.uniform(-4.0, 4.0);
      Vec q = g.mirror(y);
      for (int i = 0; i < n; ++i) {
        double h = 1e-5 * std::max(1.0, std::fabs(y[i]));
        Vec yp = y, ym = y;
        yp[i] += h;
        ym[i] -= h;
        double fd = (g.conjugate(yp) - g.conjugate(ym)) / (2.0 * h);
        CHECK(std::fabs(fd - q[i]) <= 1e-5 * std::max(std::fabs(q[i]), 1e-9));
      }
    }
  }
}

TEST_CASE("mirror map is (1/alpha)-Lipschitz in the declared norms") {
  Rng rng(12);
  for (auto g : {entropy(4), fermi(3), euclid(Domain::ball(2, 1.0))}) {
    const int n = g.domain().dim();
    for (int k = 0; k < 1000; ++k) {
      Vec y1(n), y2(n), d(n), dq(n);
      for (int i = 0; i < n; ++i) {
        y1[i] = rng.uniform(-6.0, 6.0);
        y2[i] = rng.uniform(-6.0, 6.0);
        d[i] = y1[i] - y2[i];
      }
      Vec q1 = g.mirror(y1), q2 = g.mirror(y2);
      for (int i = 0; i < n; ++i) dq[i] = q1[i] - q2[i];
      CHECK(g.primal_norm_of(dq) <= g.dual_norm_of(d) / g.alpha() + 1e-9);
    }
  }
}

TEST_CASE("fenchel lower bound and increment inequality") {
  Rng rng(13);
  for (auto g : {entropy(3), fermi(2), euclid(Domain::box(2, 0, 1))}) {
    const int n = g.domain().dim();
    Vec x(n);
    for (int k = 0; k < 1000; ++k) {
      g.domain().sample(rng, x);
      Vec y(n), yp(n);
      for (int i = 0; i < n; ++i) {
        y[i] = rng.uniform(-5.0, 5.0);
        yp[i] = rng.uniform(-5.0, 5.0);
      }
      Vec q = g.mirror(y);
      Vec dq(n), dy(n);
      for (int i = 0; i < n; ++i) {
        dq[i] = q[i] - x[i];
        dy[i] = yp[i] - y[i];
      }
      double nb = g.primal_norm_of(dq);
      CHECK(g.fenchel(x, y) >= 0.5 * g.alpha() * nb * nb - 1e-9);
      double dn = g.dual_norm_of(dy);
      CHECK(g.fenchel(x, yp) <=
            g.fenchel(x, y) + dot(dy, dq) + dn * dn / (2.0 * g.alpha()) + 1e-9);
    }
  }
}

TEST_CASE("fenchel reciprocity along the vertex ray") {
  auto g = entropy(4);
  Vec e1{1.0, 0.0, 0.0, 0.0};
  double prev = std::numeric_limits<double>::infinity();
  double last = 0.0;
  for (int t = 1; t <= 30; ++t) {
    Vec y{static_cast<double>(t), 0.0, 0.0, 0.0};
    double f = g.fenchel(e1, y);
    CHECK(f < prev);
    prev = f;
    last = f;
  }
  CHECK(last < 1e-6);
}

TEST_CASE("strong convexity midpoint inequality") {
  Rng rng(14);
  for (auto g : {entropy(3), fermi(2), euclid(Domain::ball(3, 2.0))}) {
    const int n = g.domain().dim();
    Vec x(n), xp(n), mid(n), d(n);
    for (int k = 0; k < 1000; ++k) {
      g.domain().sample(rng, x);
      g.domain().sample(rng, xp);
      for (int i = 0; i < n; ++i) {
        mid[i] = 0.5 * (x[i] + xp[i]);
        d[i] = x[i] - xp[i];
      }
      double nd = g.primal_norm_of(d);
      CHECK(g.eval(mid) <= 0.5 * (g.eval(x) + g.eval(xp)) - g.alpha() / 8.0 * nd * nd + 1e-9);
    }
  }
}

TEST_CASE("geometry pairing rules") {
  CHECK_THROWS_AS(DistanceGenerator(DgfKind::gibbs_shannon, Domain::box(2, 0, 1)),
                  std::invalid_argument);
  CHECK_THROWS_AS(DistanceGenerator(DgfKind::fermi_dirac, Domain::simplex(2)),
                  std::invalid_argument);
  CHECK_THROWS_AS(DistanceGenerator(DgfKind::fermi_dirac, Domain::box(2, -1, 1)),
                  std::invalid_argument);
}

TEST_CASE("product geometry adds depths and couples blockwise") {
  std::vector<DistanceGenerator> parts;
  parts.emplace_back(DgfKind::gibbs_shannon, Domain::simplex(2));
  parts.emplace_back(DgfKind::gibbs_shannon, Domain::simplex(2));
  Geometry g(std::move(parts));
  CHECK(g.depth() == doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-14));
  CHECK(g.ldp_alpha() == doctest::Approx(0.5));
  CHECK(g.diameter() == doctest::Approx(2.0));  // sqrt(2 + 2)
  Vec y{0.0, 0.0, std::log(2.0), 0.0};
  Vec q = g.mirror(y);
  CHECK(q[0] == doctest::Approx(0.5));
  CHECK(q[2] == doctest::Approx(2.0 / 3.0));
  CHECK(g.fenchel(Vec{0.5, 0.5, 2.0 / 3.0, 1.0 / 3.0}, y) == doctest::Approx(0.0).epsilon(1e-12));
}
