#include "mdvi/problems.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

namespace mdvi {

namespace {

Eigen::MatrixXd to_eigen(const Mat& m) {
  Eigen::MatrixXd e(m.rows, m.cols);
  for (int i = 0; i < m.rows; ++i)
    for (int j = 0; j < m.cols; ++j) e(i, j) = m(i, j);
  return e;
}

double min_sym_eigenvalue(const Mat& A) {
  Eigen::MatrixXd e = to_eigen(A);
  Eigen::MatrixXd sym = 0.5 * (e + e.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

double operator_norm(const Mat& A) {
  if (A.empty()) return 0.0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(to_eigen(A));
  return svd.singularValues()(0);
}

}  // namespace

void MonotoneOperator::finalize_affine(double psd_tol) {
  double lam_min = min_sym_eigenvalue(A_);
  if (lam_min < -psd_tol)
    throw std::invalid_argument("operator is not monotone: min eig of (A+A')/2 = " +
                                std::to_string(lam_min));
  lipschitz_ = operator_norm(A_);
  gamma_ = std::max(lam_min, 0.0);
  mono_ = gamma_ > 1e-12 ? MonotonicityClass::strong : MonotonicityClass::monotone;
}

MonotoneOperator MonotoneOperator::affine(Mat A, Vec b, Domain domain) {
  if (A.rows != A.cols || A.rows != domain.dim())
    throw std::invalid_argument("affine operator dimension mismatch");
  if (!b.empty() && b.size() != static_cast<size_t>(A.rows))
    throw std::invalid_argument("affine offset dimension mismatch");
  MonotoneOperator op;
  op.kind_ = OperatorKind::affine;
  op.domain_ = std::move(domain);
  op.A_ = std::move(A);
  op.b_ = b.empty() ? Vec(op.A_.rows, 0.0) : std::move(b);
  op.finalize_affine(1e-9);
  return op;
}

MonotoneOperator MonotoneOperator::quadratic_gradient(Mat P, Vec q, Domain domain) {
  if (P.rows != P.cols || P.rows != domain.dim())
    throw std::invalid_argument("quadratic operator dimension mismatch");
  for (int i = 0; i < P.rows; ++i)
    for (int j = 0; j < i; ++j)
      if (std::fabs(P(i, j) - P(j, i)) > 1e-12)
        throw std::invalid_argument("quadratic_gradient requires a symmetric P");
  MonotoneOperator op;
  op.kind_ = OperatorKind::quadratic_gradient;
  op.domain_ = std::move(domain);
  op.A_ = std::move(P);
  op.b_ = q.empty() ? Vec(op.A_.rows, 0.0) : std::move(q);
  op.finalize_affine(1e-9);
  return op;
}

MonotoneOperator MonotoneOperator::matrix_game(Mat M) {
  if (M.empty()) throw std::invalid_argument("payoff matrix must be nonempty");
  int n1 = M.rows, n2 = M.cols;
  MonotoneOperator op;
  op.kind_ = OperatorKind::matrix_game;
  op.n1_ = n1;
  op.n2_ = n2;
  op.domain_ = Domain::product({Domain::simplex(n1), Domain::simplex(n2)});
  // canonical affine form [[0, M], [-M', 0]]
  op.A_ = Mat(n1 + n2, n1 + n2);
  for (int i = 0; i < n1; ++i)
    for (int j = 0; j < n2; ++j) {
      op.A_(i, n1 + j) = M(i, j);
      op.A_(n1 + j, i) = -M(i, j);
    }
  op.b_ = Vec(n1 + n2, 0.0);
  op.M_ = std::move(M);
  op.lipschitz_ = operator_norm(op.A_);
  op.gamma_ = 0.0;
  op.mono_ = MonotonicityClass::monotone;  // skew block structure, exactly monotone
  return op;
}

MonotoneOperator MonotoneOperator::strongly_monotone_toy(double gamma, Vec x_star, Mat rotation,
                                                         Domain domain) {
  int n = domain.dim();
  if (!(gamma > 0.0)) throw std::invalid_argument("toy operator requires gamma > 0");
  if (x_star.size() != static_cast<size_t>(n))
    throw std::invalid_argument("x_star dimension mismatch");
  if (!domain.contains(x_star)) throw std::invalid_argument("x_star must lie in the domain");
  if (rotation.empty()) rotation = Mat(n, n);
  if (rotation.rows != n || rotation.cols != n)
    throw std::invalid_argument("rotation dimension mismatch");
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (std::fabs(rotation(i, j) + rotation(j, i)) > 1e-12)
        throw std::invalid_argument("rotation must be skew-symmetric");

  MonotoneOperator op;
  op.kind_ = OperatorKind::strongly_monotone_toy;
  op.domain_ = std::move(domain);
  op.A_ = rotation;
  for (int i = 0; i < n; ++i) op.A_(i, i) += gamma;
  op.b_ = Vec(n, 0.0);
  Vec tmp(n);
  affine_apply(op.A_, x_star, {}, tmp);
  for (int i = 0; i < n; ++i) op.b_[i] = -tmp[i];
  op.x_star_ = std::move(x_star);
  op.lipschitz_ = std::sqrt(gamma * gamma + operator_norm(rotation) * operator_norm(rotation));
  op.gamma_ = gamma;
  op.mono_ = MonotonicityClass::strong;
  return op;
}

MonotoneOperator MonotoneOperator::strongly_monotone_toy(double gamma, Vec x_star, Domain domain) {
  return strongly_monotone_toy(gamma, std::move(x_star), Mat(), std::move(domain));
}

MonotoneOperator MonotoneOperator::convex_game(Mat A1, Mat B1, Vec c1, Mat A2, Mat B2, Vec c2,
                                               Domain d1, Domain d2) {
  int n1 = d1.dim(), n2 = d2.dim();
  if (A1.rows != n1 || A1.cols != n1 || A2.rows != n2 || A2.cols != n2 || B1.rows != n1 ||
      B1.cols != n2 || B2.rows != n2 || B2.cols != n1)
    throw std::invalid_argument("convex_game block dimension mismatch");
  MonotoneOperator op;
  op.kind_ = OperatorKind::convex_game;
  op.n1_ = n1;
  op.n2_ = n2;
  op.domain_ = Domain::product({std::move(d1), std::move(d2)});
  op.A_ = Mat(n1 + n2, n1 + n2);
  for (int i = 0; i < n1; ++i) {
    for (int j = 0; j < n1; ++j) op.A_(i, j) = A1(i, j);
    for (int j = 0; j < n2; ++j) op.A_(i, n1 + j) = B1(i, j);
  }
  for (int i = 0; i < n2; ++i) {
    for (int j = 0; j < n1; ++j) op.A_(n1 + i, j) = B2(i, j);
    for (int j = 0; j < n2; ++j) op.A_(n1 + i, n1 + j) = A2(i, j);
  }
  op.b_ = Vec(n1 + n2, 0.0);
  if (!c1.empty()) std::copy(c1.begin(), c1.end(), op.b_.begin());
  if (!c2.empty()) std::copy(c2.begin(), c2.end(), op.b_.begin() + n1);
  op.finalize_affine(1e-9);
  op.kind_ = OperatorKind::convex_game;
  return op;
}

void MonotoneOperator::value(std::span<const double> x, std::span<double> out) const {
  domain_.check_membership(x);
  affine_apply(A_, x, b_, out);
}

Vec MonotoneOperator::value(std::span<const double> x) const {
  Vec out(dim());
  value(x, out);
  return out;
}

const Mat& MonotoneOperator::game_matrix() const {
  if (kind_ != OperatorKind::matrix_game)
    throw std::invalid_argument("game_matrix is only defined for matrix games");
  return M_;
}

VIProblem::VIProblem(MonotoneOperator op_, Geometry geom_, std::optional<Vec> known)
    : op(std::move(op_)), geom(std::move(geom_)), known_solution(std::move(known)) {
  if (!(geom.domain() == op.domain()))
    throw std::invalid_argument("geometry domain does not match operator domain");
  if (known_solution) {
    if (!op.domain().contains(*known_solution))
      throw std::invalid_argument("known solution is not in the domain");
    // Minty sample test
    Rng rng(0x5eedu);
    Vec x(op.dim()), v(op.dim()), d(op.dim());
    for (int k = 0; k < 1000; ++k) {
      op.domain().sample(rng, x);
      op.value(x, v);
      for (int i = 0; i < op.dim(); ++i) d[i] = x[i] - (*known_solution)[i];
      if (dot(v, d) < -1e-7)
        throw std::invalid_argument("known solution fails the sampled Minty inequality");
    }
  }
}

Vec operator_value(const VIProblem& p, std::span<const double> x) { return p.op.value(x); }

GapEvaluator::GapEvaluator(const VIProblem& p) : p_(&p) {
  const Domain& dom = p.domain();
  if (p.op.kind() == OperatorKind::matrix_game) {
    regime_ = GapRegime::vertex_exact;
    return;  // evaluated in closed form via the payoff matrix
  }
  if (dom.has_vertices()) {
    candidates_ = dom.vertices();
    regime_ = GapRegime::vertex_exact;
  }
  if (p.known_solution) candidates_.push_back(*p.known_solution);
  candidates_.push_back(dom.interior_point());
  // All operator kinds here are affine, so the inner maximization of
  // <v(x'), x - x'> is concave and projected gradient ascent applies. When
  // A + A' = 0 the inner objective is linear and polytope vertices already
  // attain the maximum.
  const Mat& A = p.op.affine_matrix();
  double skew_defect = 0.0;
  for (int i = 0; i < A.rows; ++i)
    for (int j = 0; j < A.cols; ++j) skew_defect = std::max(skew_defect, std::fabs(A(i, j) + A(j, i)));
  double l_phi = 2.0 * operator_norm(A);
  inner_step_ = 1.0 / std::max(l_phi, 1e-12);
  warm_ = dom.interior_point();
  regime_ = (skew_defect <= 1e-14 && dom.has_vertices()) ? GapRegime::vertex_exact
                                                         : GapRegime::concave_inner;
}

double GapEvaluator::gap(std::span<const double> x) const {
  const VIProblem& p = *p_;
  if (p.op.kind() == OperatorKind::matrix_game) return ni_gap(p, x);

  const int n = p.dim();
  Vec v(n), d(n);
  double best = -std::numeric_limits<double>::infinity();
  auto score = [&](const Vec& cand) {
    p.op.value(cand, v);
    for (int i = 0; i < n; ++i) d[i] = x[i] - cand[i];
    return dot(v, d);
  };
  for (const auto& c : candidates_) best = std::max(best, score(c));

  // projected gradient ascent on phi(x') = <A x' + b, x - x'>
  const Mat& A = p.op.affine_matrix();
  const Vec& b = p.op.affine_offset();
  Vec z = warm_, g(n), zn(n), tmp(n);
  double prev = -std::numeric_limits<double>::infinity();
  for (int it = 0; it < 2000; ++it) {
    // grad = A' x - (A + A') z - b
    for (int i = 0; i < n; ++i) {
      double s = -b[i];
      for (int j = 0; j < n; ++j) s += A(j, i) * (x[j] - z[j]) - A(i, j) * z[j];
      g[i] = s;
    }
    for (int i = 0; i < n; ++i) tmp[i] = z[i] + inner_step_ * g[i];
    p.domain().project(tmp, zn);
    z.swap(zn);
    if (it % 16 == 15) {
      double cur = score(z);
      if (cur <= prev + 1e-14 * (1.0 + std::fabs(cur))) break;
      prev = cur;
    }
  }
  warm_ = z;
  best = std::max(best, score(z));
  return std::max(best, 0.0);
}

std::string GapEvaluator::regime_name() const {
  switch (regime_) {
    case GapRegime::vertex_exact: return "vertex_exact";
    case GapRegime::concave_inner: return "concave_inner";
    case GapRegime::candidate_lower_bound: return "candidate_lower_bound";
  }
  return "?";
}

double restricted_dual_gap(const VIProblem& p, std::span<const double> x,
                           const std::vector<Vec>& extra_candidates) {
  p.domain().check_membership(x);
  GapEvaluator eval(p);
  double best = eval.gap(x);
  const int n = p.dim();
  Vec v(n), d(n);
  for (const auto& c : extra_candidates) {
    p.domain().check_membership(c);
    p.op.value(c, v);
    for (int i = 0; i < n; ++i) d[i] = x[i] - c[i];
    best = std::max(best, dot(v, d));
  }
  return best;
}

double ni_gap(const VIProblem& p, std::span<const double> x1, std::span<const double> x2) {
  if (p.op.kind() != OperatorKind::matrix_game)
    throw std::invalid_argument("ni_gap is only defined for matrix games");
  const Mat& M = p.op.game_matrix();
  Domain::simplex(M.rows).check_membership(x1);
  Domain::simplex(M.cols).check_membership(x2);
  double best_col = -std::numeric_limits<double>::infinity();
  for (int j = 0; j < M.cols; ++j) {
    double s = 0.0;
    for (int i = 0; i < M.rows; ++i) s += x1[i] * M(i, j);
    best_col = std::max(best_col, s);
  }
  double worst_row = std::numeric_limits<double>::infinity();
  for (int i = 0; i < M.rows; ++i) {
    double s = 0.0;
    for (int j = 0; j < M.cols; ++j) s += M(i, j) * x2[j];
    worst_row = std::min(worst_row, s);
  }
  return best_col - worst_row;
}

double ni_gap(const VIProblem& p, std::span<const double> x) {
  int n1 = p.op.n1();
  return ni_gap(p, x.subspan(0, n1), x.subspan(n1));
}

double solution_gap(const VIProblem& p, const GapEvaluator& eval, std::span<const double> x) {
  if (p.op.kind() == OperatorKind::matrix_game) return ni_gap(p, x);
  return eval.gap(x);
}

ProbeReport monotonicity_probe(const VIProblem& p, int num_pairs, uint64_t seed) {
  if (num_pairs < 1) throw std::invalid_argument("num_pairs must be >= 1");
  ProbeReport rep;
  rep.num_pairs = num_pairs;
  rep.seed = seed;
  rep.min_inner = std::numeric_limits<double>::infinity();
  rep.min_modulus = std::numeric_limits<double>::infinity();
  rep.max_lipschitz_ratio = 0.0;
  Rng rng(seed);
  const int n = p.dim();
  Vec x(n), xp(n), vx(n), vxp(n), d(n), dv(n);
  for (int k = 0; k < num_pairs; ++k) {
    p.domain().sample(rng, x);
    p.domain().sample(rng, xp);
    p.op.value(x, vx);
    p.op.value(xp, vxp);
    double nd2 = 0.0;
    for (int i = 0; i < n; ++i) {
      d[i] = xp[i] - x[i];
      dv[i] = vxp[i] - vx[i];
      nd2 += d[i] * d[i];
    }
    if (nd2 < 1e-24) continue;
    double inner = dot(dv, d);
    rep.min_inner = std::min(rep.min_inner, inner);
    rep.min_modulus = std::min(rep.min_modulus, inner / nd2);
    rep.max_lipschitz_ratio = std::max(rep.max_lipschitz_ratio, norm2(dv) / std::sqrt(nd2));
  }
  rep.monotonicity_violation = rep.min_inner < -1e-9;
  rep.lipschitz_violation = rep.max_lipschitz_ratio > p.op.lipschitz() * (1.0 + 1e-6);
  return rep;
}

Vec extragradient_solve(const MonotoneOperator& op, double tol, int max_iter) {
  const int n = op.dim();
  const Domain& dom = op.domain();
  Vec x = dom.interior_point();
  Vec v(n), xh(n), vh(n), tmp(n), xn(n);
  double tau = 0.5 / std::max(op.lipschitz(), 1e-9);
  tau = std::min(tau, 1.0);
  for (int it = 0; it < max_iter; ++it) {
    op.value(x, v);
    for (int i = 0; i < n; ++i) tmp[i] = x[i] - tau * v[i];
    dom.project(tmp, xh);
    op.value(xh, vh);
    for (int i = 0; i < n; ++i) tmp[i] = x[i] - tau * vh[i];
    dom.project(tmp, xn);
    x.swap(xn);
    if (it % 64 == 0) {
      // natural residual ||x - P(x - v(x))||
      op.value(x, v);
      for (int i = 0; i < n; ++i) tmp[i] = x[i] - v[i];
      dom.project(tmp, xh);
      double r = 0.0;
      for (int i = 0; i < n; ++i) r += (x[i] - xh[i]) * (x[i] - xh[i]);
      if (std::sqrt(r) <= tol) return x;
    }
  }
  // final residual check before giving up
  op.value(x, v);
  for (int i = 0; i < n; ++i) tmp[i] = x[i] - v[i];
  dom.project(tmp, xh);
  double r = 0.0;
  for (int i = 0; i < n; ++i) r += (x[i] - xh[i]) * (x[i] - xh[i]);
  if (std::sqrt(r) <= tol) return x;
  throw OracleFailure("extragradient oracle did not reach residual " + std::to_string(tol));
}

Vec reference_solution(const VIProblem& p) {
  if (p.known_solution) return *p.known_solution;
  if (p.op.kind() == OperatorKind::strongly_monotone_toy) return p.op.toy_solution();
  if (p.op.kind() == OperatorKind::matrix_game) {
    const Mat& M = p.op.game_matrix();
    if (M.rows == 2 && M.cols == 2) {
      // interior mixed equilibrium of a 2x2 zero-sum game
      double den = M(0, 0) - M(0, 1) - M(1, 0) + M(1, 1);
      if (std::fabs(den) > 1e-12) {
        double q = (M(1, 1) - M(0, 1)) / den;  // row player weight on row 1
        double r = (M(1, 1) - M(1, 0)) / den;  // column player weight on col 1
        if (q > 0.0 && q < 1.0 && r > 0.0 && r < 1.0) return Vec{q, 1.0 - q, r, 1.0 - r};
      }
    }
  }
  return extragradient_solve(p.op);
}

}  // namespace mdvi
