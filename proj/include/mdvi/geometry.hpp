#ifndef MDVI_GEOMETRY_HPP
#define MDVI_GEOMETRY_HPP

#include <span>
#include <string>
#include <vector>

#include "mdvi/common.hpp"
#include "mdvi/domain.hpp"

namespace mdvi {

enum class DgfKind { euclidean, gibbs_shannon, fermi_dirac };
enum class PrimalNorm { l1, l2 };

// Distance-generating function on a single compact convex domain, together
// with its mirror map Q(y) = argmax { <y,x> - h(x) }, convex conjugate h*,
// Fenchel coupling F(x,y) = h(x) + h*(y) - <y,x>, depth max h - min h and
// prox-center Q(0).
//
// Pinned (kind, norm, alpha) triples:
//   euclidean      h = 0.5*||x||_2^2    any domain        alpha = 1  (l2)
//   gibbs_shannon  sum x log x          unit simplex      alpha = 1  (l1, Pinsker)
//   fermi_dirac    sum x log x+(1-x)log(1-x)  [0,1]^n     alpha = 4  (l2)
class DistanceGenerator {
 public:
  DistanceGenerator(DgfKind kind, Domain domain);

  double eval(std::span<const double> x) const;             // h(x)
  void mirror(std::span<const double> y, std::span<double> out) const;  // Q(y)
  Vec mirror(std::span<const double> y) const;
  double conjugate(std::span<const double> y) const;        // h*(y)
  double fenchel(std::span<const double> x, std::span<const double> y) const;
  double depth() const;
  Vec prox_center() const;

  DgfKind kind() const { return kind_; }
  const Domain& domain() const { return domain_; }
  double alpha() const { return alpha_; }
  PrimalNorm primal_norm() const { return norm_; }
  // Squared equivalence constant between ||.||_2 and the primal norm on the
  // domain (||z||_2 <= sqrt(kappa)*||z||). Equals 1 for both norms used here.
  double kappa() const { return 1.0; }

  double primal_norm_of(std::span<const double> v) const {
    return norm_ == PrimalNorm::l1 ? norm1(v) : norm2(v);
  }
  double dual_norm_of(std::span<const double> v) const {
    return norm_ == PrimalNorm::l1 ? norm_inf(v) : norm2(v);
  }

 private:
  DgfKind kind_;
  Domain domain_;
  double alpha_;
  PrimalNorm norm_;
};

DgfKind dgf_kind_from_string(const std::string& key);  // "euclidean" | "entropy" | "fermi_dirac"
std::string to_string(DgfKind k);

// One distance generator per domain factor; plain problems have a single part.
// h, h* and F add over parts, the mirror map acts blockwise and the depth is
// the sum of the part depths (the saddle constant D_sp).
class Geometry {
 public:
  explicit Geometry(DistanceGenerator part);
  explicit Geometry(std::vector<DistanceGenerator> parts);

  int dim() const { return domain_.dim(); }
  const Domain& domain() const { return domain_; }
  const std::vector<DistanceGenerator>& parts() const { return parts_; }
  int part_offset(size_t i) const { return offsets_[i]; }

  double eval(std::span<const double> x) const;
  void mirror(std::span<const double> y, std::span<double> out) const;
  Vec mirror(std::span<const double> y) const;
  double conjugate(std::span<const double> y) const;
  double fenchel(std::span<const double> x, std::span<const double> y) const;
  double depth() const;
  Vec prox_center() const;

  // Harmonic composition 1/(sum 1/alpha_i); collapses to alpha for one part.
  // This is the constant entering the noise term of the gap bounds.
  double ldp_alpha() const;
  double kappa() const;     // max over parts (all 1 here)
  double diameter() const { return domain_.diameter(); }

 private:
  std::vector<DistanceGenerator> parts_;
  std::vector<int> offsets_;
  Domain domain_;
};

}  // namespace mdvi

#endif
