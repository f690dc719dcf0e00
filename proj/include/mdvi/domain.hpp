#ifndef MDVI_DOMAIN_HPP
#define MDVI_DOMAIN_HPP

#include <optional>
#include <span>
#include <vector>

#include "mdvi/common.hpp"
#include "mdvi/rng.hpp"

namespace mdvi {

enum class DomainKind { simplex, box, ball, product };

// Compact convex feasible set. Points of a product domain are stored as the
// concatenation of the factor blocks.
class Domain {
 public:
  Domain() = default;  // empty (dim 0); assign a factory result before use

  static Domain simplex(int n);
  static Domain box(int n, double lo, double hi);
  static Domain ball(int n, double radius, Vec center);
  static Domain ball(int n, double radius);  // centered at the origin
  static Domain product(std::vector<Domain> factors);

  DomainKind kind() const { return kind_; }
  int dim() const { return dim_; }
  double lo() const { return lo_; }
  double hi() const { return hi_; }
  double radius() const { return radius_; }
  const Vec& center() const { return center_; }
  const std::vector<Domain>& factors() const { return factors_; }
  // Offset of factor i in a concatenated point (product kind).
  int factor_offset(size_t i) const;

  bool contains(std::span<const double> x, double tol = 1e-9) const;
  void check_membership(std::span<const double> x, double tol = 1e-9) const;

  // Euclidean projection onto the set. Simplex uses the sort-based threshold
  // algorithm, boxes clamp componentwise, balls rescale radially.
  void project(std::span<const double> y, std::span<double> out) const;

  // Uniform-ish sample (Dirichlet(1) on simplices, uniform on boxes and balls).
  void sample(Rng& rng, std::span<double> out) const;

  bool has_vertices() const;
  std::vector<Vec> vertices() const;  // throws for balls

  Vec interior_point() const;
  double diameter() const;  // Euclidean

  bool operator==(const Domain& other) const;

 private:
  DomainKind kind_ = DomainKind::box;
  int dim_ = 0;
  double lo_ = 0.0, hi_ = 1.0, radius_ = 1.0;
  Vec center_;
  std::vector<Domain> factors_;
  std::vector<int> offsets_;
};

}  // namespace mdvi

#endif
