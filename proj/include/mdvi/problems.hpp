#ifndef MDVI_PROBLEMS_HPP
#define MDVI_PROBLEMS_HPP

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mdvi/common.hpp"
#include "mdvi/domain.hpp"
#include "mdvi/geometry.hpp"

namespace mdvi {

enum class OperatorKind { affine, quadratic_gradient, matrix_game, strongly_monotone_toy, convex_game };
enum class MonotonicityClass { monotone, strict, strong };

// Single-valued Lipschitz monotone map on a compact convex domain. Every kind
// shipped here is affine, v(x) = Ax + c, which the gap evaluator exploits.
// Construction validates monotonicity spectrally (A + A^T must be PSD up to
// -1e-9 on its smallest eigenvalue) and computes the l2 Lipschitz constant.
class MonotoneOperator {
 public:
  static MonotoneOperator affine(Mat A, Vec b, Domain domain);
  static MonotoneOperator quadratic_gradient(Mat P, Vec q, Domain domain);
  // v(x1,x2) = (M x2, -M^T x1) on simplex(n1) x simplex(n2); player 1 minimizes
  // U(x1,x2) = <x1, M x2>.
  static MonotoneOperator matrix_game(Mat M);
  // v(x) = gamma (x - x_star) + R (x - x_star) with R skew-symmetric.
  static MonotoneOperator strongly_monotone_toy(double gamma, Vec x_star, Mat rotation,
                                                Domain domain);
  static MonotoneOperator strongly_monotone_toy(double gamma, Vec x_star, Domain domain);
  // Two players with quadratic costs c_i = 0.5 x_i' A_i x_i + x_i' B_i x_-i + c_i' x_i.
  static MonotoneOperator convex_game(Mat A1, Mat B1, Vec c1, Mat A2, Mat B2, Vec c2,
                                      Domain d1, Domain d2);

  void value(std::span<const double> x, std::span<double> out) const;
  Vec value(std::span<const double> x) const;

  OperatorKind kind() const { return kind_; }
  const Domain& domain() const { return domain_; }
  int dim() const { return domain_.dim(); }
  double lipschitz() const { return lipschitz_; }
  MonotonicityClass monotonicity() const { return mono_; }
  double strong_modulus() const { return gamma_; }

  const Mat& affine_matrix() const { return A_; }
  const Vec& affine_offset() const { return b_; }

  bool is_game() const { return n2_ > 0; }
  const Mat& game_matrix() const;
  int n1() const { return n1_; }
  int n2() const { return n2_; }
  const Vec& toy_solution() const { return x_star_; }

 private:
  MonotoneOperator() = default;
  void finalize_affine(double psd_tol);

  OperatorKind kind_ = OperatorKind::affine;
  Domain domain_;
  Mat A_;            // canonical affine form
  Vec b_;
  Mat M_;            // matrix_game payoff
  Vec x_star_;       // toy solution
  int n1_ = 0, n2_ = 0;
  double lipschitz_ = 0.0;
  double gamma_ = 0.0;
  MonotonicityClass mono_ = MonotonicityClass::monotone;
};

// Problem bundle: operator + distance-generating geometry on the same domain,
// plus an optional known solution (validated against the Minty inequality on
// 1000 sampled points).
struct VIProblem {
  MonotoneOperator op;
  Geometry geom;
  std::optional<Vec> known_solution;

  VIProblem(MonotoneOperator op_, Geometry geom_, std::optional<Vec> known = std::nullopt);
  int dim() const { return op.dim(); }
  const Domain& domain() const { return op.domain(); }
};

Vec operator_value(const VIProblem& p, std::span<const double> x);

// Restricted dual gap max over a candidate set of <v(x'), x - x'>. Candidates
// always include polytope vertices, the known solution when present and the
// caller-supplied points; for affine operators the concave inner maximization
// is run as well and its result appended. A lower bound on the true dual gap
// in general; exact for bilinear games on products of simplices.
enum class GapRegime { vertex_exact, concave_inner, candidate_lower_bound };

class GapEvaluator {
 public:
  explicit GapEvaluator(const VIProblem& p);
  double gap(std::span<const double> x) const;
  GapRegime regime() const { return regime_; }
  std::string regime_name() const;

 private:
  const VIProblem* p_;
  std::vector<Vec> candidates_;
  GapRegime regime_;
  mutable Vec warm_;  // warm start for the inner concave solver
  double inner_step_ = 0.0;
};

double restricted_dual_gap(const VIProblem& p, std::span<const double> x,
                           const std::vector<Vec>& extra_candidates = {});

// Nikaido-Isoda gap for matrix games: max_j (x1' M)_j - min_i (M x2)_i.
double ni_gap(const VIProblem& p, std::span<const double> x1, std::span<const double> x2);
double ni_gap(const VIProblem& p, std::span<const double> x);  // concatenated point

// NI gap for games, restricted dual gap otherwise.
double solution_gap(const VIProblem& p, const GapEvaluator& eval, std::span<const double> x);

struct ProbeReport {
  int num_pairs = 0;
  uint64_t seed = 0;
  double min_inner = 0.0;           // min <v(x')-v(x), x'-x>
  double min_modulus = 0.0;         // min of the same over ||x'-x||_2^2
  double max_lipschitz_ratio = 0.0; // max ||v(x')-v(x)||_2 / ||x'-x||_2
  bool monotonicity_violation = false;
  bool lipschitz_violation = false;
};

ProbeReport monotonicity_probe(const VIProblem& p, int num_pairs, uint64_t seed);

// Reference solution: known_solution if set, closed forms for the toy and for
// 2x2 matrix games with interior equilibria, otherwise a high-accuracy
// extragradient iteration (residual <= 1e-10). Independent of the mirror
// descent path so it can serve as a testing oracle.
Vec reference_solution(const VIProblem& p);

// Extragradient with Euclidean projections; exposed for cross-checks.
Vec extragradient_solve(const MonotoneOperator& op, double tol = 1e-10, int max_iter = 2000000);

}  // namespace mdvi

#endif
