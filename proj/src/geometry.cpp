#include "mdvi/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace mdvi {

namespace {

// 0*log(0) = 0 at the boundary; tiny negatives from membership tolerance are
// treated as 0.
inline double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

// log(sum exp(y_j)) with max shift.
double log_sum_exp(std::span<const double> y) {
  double m = y[0];
  for (double v : y) m = std::max(m, v);
  double s = 0.0;
  for (double v : y) s += std::exp(v - m);
  return m + std::log(s);
}

// log(1 + exp(y)) without overflow.
inline double softplus(double y) { return std::max(y, 0.0) + std::log1p(std::exp(-std::fabs(y))); }

inline double logistic(double y) {
  if (y >= 0.0) {
    double e = std::exp(-y);
    return 1.0 / (1.0 + e);
  }
  double e = std::exp(y);
  return e / (1.0 + e);
}

void softmax(std::span<const double> y, std::span<double> out) {
  double m = y[0];
  for (double v : y) m = std::max(m, v);
  double s = 0.0;
  for (size_t i = 0; i < y.size(); ++i) {
    out[i] = std::exp(y[i] - m);
    s += out[i];
  }
  for (size_t i = 0; i < y.size(); ++i) out[i] /= s;
}

}  // namespace

DistanceGenerator::DistanceGenerator(DgfKind kind, Domain domain)
    : kind_(kind), domain_(std::move(domain)) {
  switch (kind_) {
    case DgfKind::euclidean:
      if (domain_.kind() == DomainKind::product)
        throw std::invalid_argument("distance generators are per-factor; wrap them in a Geometry");
      alpha_ = 1.0;
      norm_ = PrimalNorm::l2;
      break;
    case DgfKind::gibbs_shannon:
      if (domain_.kind() != DomainKind::simplex)
        throw std::invalid_argument("gibbs_shannon entropy requires a simplex domain");
      alpha_ = 1.0;
      norm_ = PrimalNorm::l1;
      break;
    case DgfKind::fermi_dirac:
      if (domain_.kind() != DomainKind::box || domain_.lo() != 0.0 || domain_.hi() != 1.0)
        throw std::invalid_argument("fermi_dirac entropy requires the unit box [0,1]^n");
      alpha_ = 4.0;
      norm_ = PrimalNorm::l2;
      break;
  }
}

double DistanceGenerator::eval(std::span<const double> x) const {
  domain_.check_membership(x);
  switch (kind_) {
    case DgfKind::euclidean:
      return 0.5 * dot(x, x);
    case DgfKind::gibbs_shannon: {
      double s = 0.0;
      for (double v : x) s += xlogx(v);
      return s;
    }
    case DgfKind::fermi_dirac: {
      double s = 0.0;
      for (double v : x) s += xlogx(v) + xlogx(1.0 - v);
      return s;
    }
  }
  return 0.0;
}

void DistanceGenerator::mirror(std::span<const double> y, std::span<double> out) const {
  if (!all_finite(y)) throw NumericInputError("mirror map input is not finite");
  switch (kind_) {
    case DgfKind::euclidean:
      domain_.project(y, out);
      return;
    case DgfKind::gibbs_shannon:
      softmax(y, out);
      return;
    case DgfKind::fermi_dirac:
      for (size_t i = 0; i < y.size(); ++i) out[i] = logistic(y[i]);
      return;
  }
}

Vec DistanceGenerator::mirror(std::span<const double> y) const {
  Vec out(y.size());
  mirror(y, out);
  return out;
}

double DistanceGenerator::conjugate(std::span<const double> y) const {
  if (!all_finite(y)) throw NumericInputError("conjugate input is not finite");
  switch (kind_) {
    case DgfKind::euclidean: {
      Vec q(y.size());
      domain_.project(y, q);
      return dot(y, q) - 0.5 * dot(q, q);
    }
    case DgfKind::gibbs_shannon:
      return log_sum_exp(y);
    case DgfKind::fermi_dirac: {
      double s = 0.0;
      for (double v : y) s += softplus(v);
      return s;
    }
  }
  return 0.0;
}

double DistanceGenerator::fenchel(std::span<const double> x, std::span<const double> y) const {
  double f = eval(x) + conjugate(y) - dot(y, x);
  return std::max(f, 0.0);
}

double DistanceGenerator::depth() const {
  const int n = domain_.dim();
  switch (kind_) {
    case DgfKind::gibbs_shannon:
      // max 0 at vertices, min -log n at the uniform point
      return std::log(static_cast<double>(n));
    case DgfKind::fermi_dirac:
      // max 0 at cube vertices, min -n log 2 at the center
      return n * std::numbers::ln2;
    case DgfKind::euclidean: {
      // extremes of ||x||_2 over the domain
      switch (domain_.kind()) {
        case DomainKind::simplex:
          return 0.5 * (1.0 - 1.0 / n);
        case DomainKind::box: {
          double mx = 0.0, mn = 0.0;
          double lo = domain_.lo(), hi = domain_.hi();
          double cmax = std::max(lo * lo, hi * hi);
          double cmin = (lo <= 0.0 && hi >= 0.0) ? 0.0 : std::min(lo * lo, hi * hi);
          mx = 0.5 * n * cmax;
          mn = 0.5 * n * cmin;
          return mx - mn;
        }
        case DomainKind::ball: {
          double c = norm2(domain_.center());
          double r = domain_.radius();
          double far = 0.5 * (c + r) * (c + r);
          double near = 0.5 * std::max(0.0, c - r) * std::max(0.0, c - r);
          return far - near;
        }
        case DomainKind::product:
          break;
      }
      break;
    }
  }
  throw std::invalid_argument("unsupported depth computation");
}

Vec DistanceGenerator::prox_center() const {
  Vec zero(domain_.dim(), 0.0);
  return mirror(zero);
}

DgfKind dgf_kind_from_string(const std::string& key) {
  if (key == "euclidean") return DgfKind::euclidean;
  if (key == "entropy") return DgfKind::gibbs_shannon;
  if (key == "fermi_dirac") return DgfKind::fermi_dirac;
  throw std::invalid_argument("unknown geometry key: " + key);
}

std::string to_string(DgfKind k) {
  switch (k) {
    case DgfKind::euclidean: return "euclidean";
    case DgfKind::gibbs_shannon: return "entropy";
    case DgfKind::fermi_dirac: return "fermi_dirac";
  }
  return "?";
}

Geometry::Geometry(DistanceGenerator part)
    : Geometry(std::vector<DistanceGenerator>{std::move(part)}) {}

Geometry::Geometry(std::vector<DistanceGenerator> parts)
    : parts_(std::move(parts)),
      domain_(parts_.size() == 1 ? parts_[0].domain() : Domain::product([this] {
        std::vector<Domain> ds;
        for (const auto& p : parts_) ds.push_back(p.domain());
        return ds;
      }())) {
  if (parts_.empty()) throw std::invalid_argument("geometry needs at least one part");
  offsets_.push_back(0);
  for (const auto& p : parts_) offsets_.push_back(offsets_.back() + p.domain().dim());
}

double Geometry::eval(std::span<const double> x) const {
  double s = 0.0;
  for (size_t i = 0; i < parts_.size(); ++i)
    s += parts_[i].eval(x.subspan(offsets_[i], parts_[i].domain().dim()));
  return s;
}

void Geometry::mirror(std::span<const double> y, std::span<double> out) const {
  for (size_t i = 0; i < parts_.size(); ++i)
    parts_[i].mirror(y.subspan(offsets_[i], parts_[i].domain().dim()),
                     out.subspan(offsets_[i], parts_[i].domain().dim()));
}

Vec Geometry::mirror(std::span<const double> y) const {
  Vec out(y.size());
  mirror(y, out);
  return out;
}

double Geometry::conjugate(std::span<const double> y) const {
  double s = 0.0;
  for (size_t i = 0; i < parts_.size(); ++i)
    s += parts_[i].conjugate(y.subspan(offsets_[i], parts_[i].domain().dim()));
  return s;
}

double Geometry::fenchel(std::span<const double> x, std::span<const double> y) const {
  double s = 0.0;
  for (size_t i = 0; i < parts_.size(); ++i)
    s += parts_[i].fenchel(x.subspan(offsets_[i], parts_[i].domain().dim()),
                           y.subspan(offsets_[i], parts_[i].domain().dim()));
  return s;
}

double Geometry::depth() const {
  double s = 0.0;
  for (const auto& p : parts_) s += p.depth();
  return s;
}

Vec Geometry::prox_center() const {
  Vec out(dim());
  for (size_t i = 0; i < parts_.size(); ++i) {
    Vec c = parts_[i].prox_center();
    std::copy(c.begin(), c.end(), out.begin() + offsets_[i]);
  }
  return out;
}

double Geometry::ldp_alpha() const {
  double inv = 0.0;
  for (const auto& p : parts_) inv += 1.0 / p.alpha();
  return 1.0 / inv;
}

double Geometry::kappa() const {
  double k = 1.0;
  for (const auto& p : parts_) k = std::max(k, p.kappa());
  return k;
}

}  // namespace mdvi
