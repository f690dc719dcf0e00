#include "mdvi/domain.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace mdvi {

Domain Domain::simplex(int n) {
  if (n < 1) throw std::invalid_argument("simplex dimension must be >= 1");
  Domain d;
  d.kind_ = DomainKind::simplex;
  d.dim_ = n;
  return d;
}

Domain Domain::box(int n, double lo, double hi) {
  if (n < 1) throw std::invalid_argument("box dimension must be >= 1");
  if (!(lo < hi)) throw std::invalid_argument("box requires lo < hi");
  Domain d;
  d.kind_ = DomainKind::box;
  d.dim_ = n;
  d.lo_ = lo;
  d.hi_ = hi;
  return d;
}

Domain Domain::ball(int n, double radius, Vec center) {
  if (n < 1) throw std::invalid_argument("ball dimension must be >= 1");
  if (!(radius > 0)) throw std::invalid_argument("ball requires radius > 0");
  if (center.size() != static_cast<size_t>(n))
    throw std::invalid_argument("ball center dimension mismatch");
  Domain d;
  d.kind_ = DomainKind::ball;
  d.dim_ = n;
  d.radius_ = radius;
  d.center_ = std::move(center);
  return d;
}

Domain Domain::ball(int n, double radius) { return ball(n, radius, Vec(n, 0.0)); }

Domain Domain::product(std::vector<Domain> factors) {
  if (factors.empty()) throw std::invalid_argument("product needs at least one factor");
  Domain d;
  d.kind_ = DomainKind::product;
  d.offsets_.push_back(0);
  for (const auto& f : factors) {
    if (f.kind() == DomainKind::product)
      throw std::invalid_argument("nested product domains are not supported");
    d.dim_ += f.dim();
    d.offsets_.push_back(d.dim_);
  }
  d.factors_ = std::move(factors);
  return d;
}

int Domain::factor_offset(size_t i) const { return offsets_.at(i); }

bool Domain::contains(std::span<const double> x, double tol) const {
  if (x.size() != static_cast<size_t>(dim_)) return false;
  if (!all_finite(x)) return false;
  switch (kind_) {
    case DomainKind::simplex: {
      double s = 0.0;
      for (double v : x) {
        if (v < -tol) return false;
        s += v;
      }
      return std::fabs(s - 1.0) <= tol;
    }
    case DomainKind::box:
      for (double v : x)
        if (v < lo_ - tol || v > hi_ + tol) return false;
      return true;
    case DomainKind::ball: {
      double s = 0.0;
      for (int i = 0; i < dim_; ++i) s += (x[i] - center_[i]) * (x[i] - center_[i]);
      return std::sqrt(s) <= radius_ + tol;
    }
    case DomainKind::product: {
      for (size_t i = 0; i < factors_.size(); ++i)
        if (!factors_[i].contains(x.subspan(offsets_[i], factors_[i].dim()), tol)) return false;
      return true;
    }
  }
  return false;
}

void Domain::check_membership(std::span<const double> x, double tol) const {
  if (!contains(x, tol)) throw DomainMembershipError("point is not in the domain");
}

namespace {

// Projection onto { x >= 0, sum x = 1 }: sort, find the largest k with
// y_(k) - tau_k > 0 where tau_k = (sum of top k - 1)/k, clamp at tau.
void project_simplex(std::span<const double> y, std::span<double> out) {
  const size_t n = y.size();
  Vec u(y.begin(), y.end());
  std::sort(u.begin(), u.end(), std::greater<double>());
  double cum = 0.0, tau = 0.0;
  for (size_t k = 0; k < n; ++k) {
    cum += u[k];
    double t = (cum - 1.0) / static_cast<double>(k + 1);
    if (u[k] - t > 0.0)
      tau = t;
    else
      break;
  }
  for (size_t i = 0; i < n; ++i) out[i] = std::max(y[i] - tau, 0.0);
}

}  // namespace

void Domain::project(std::span<const double> y, std::span<double> out) const {
  if (!all_finite(y)) throw NumericInputError("projection input is not finite");
  switch (kind_) {
    case DomainKind::simplex:
      project_simplex(y, out);
      return;
    case DomainKind::box:
      for (int i = 0; i < dim_; ++i) out[i] = std::clamp(y[i], lo_, hi_);
      return;
    case DomainKind::ball: {
      double s = 0.0;
      for (int i = 0; i < dim_; ++i) s += (y[i] - center_[i]) * (y[i] - center_[i]);
      double r = std::sqrt(s);
      if (r <= radius_) {
        std::copy(y.begin(), y.end(), out.begin());
      } else {
        double scale = radius_ / r;
        for (int i = 0; i < dim_; ++i) out[i] = center_[i] + scale * (y[i] - center_[i]);
      }
      return;
    }
    case DomainKind::product:
      for (size_t i = 0; i < factors_.size(); ++i)
        factors_[i].project(y.subspan(offsets_[i], factors_[i].dim()),
                            out.subspan(offsets_[i], factors_[i].dim()));
      return;
  }
}

void Domain::sample(Rng& rng, std::span<double> out) const {
  switch (kind_) {
    case DomainKind::simplex: {
      double s = 0.0;
      for (int i = 0; i < dim_; ++i) {
        out[i] = -std::log(rng.uniform_pos());
        s += out[i];
      }
      for (int i = 0; i < dim_; ++i) out[i] /= s;
      return;
    }
    case DomainKind::box:
      for (int i = 0; i < dim_; ++i) out[i] = rng.uniform(lo_, hi_);
      return;
    case DomainKind::ball: {
      double s = 0.0;
      for (int i = 0; i < dim_; ++i) {
        out[i] = rng.normal();
        s += out[i] * out[i];
      }
      double r = radius_ * std::pow(rng.uniform_pos(), 1.0 / dim_) / std::max(std::sqrt(s), 1e-300);
      for (int i = 0; i < dim_; ++i) out[i] = center_[i] + r * out[i];
      return;
    }
    case DomainKind::product:
      for (size_t i = 0; i < factors_.size(); ++i)
        factors_[i].sample(rng, out.subspan(offsets_[i], factors_[i].dim()));
      return;
  }
}

bool Domain::has_vertices() const {
  switch (kind_) {
    case DomainKind::simplex:
    case DomainKind::box:
      return true;
    case DomainKind::ball:
      return false;
    case DomainKind::product:
      return std::all_of(factors_.begin(), factors_.end(),
                         [](const Domain& f) { return f.has_vertices(); });
  }
  return false;
}

std::vector<Vec> Domain::vertices() const {
  switch (kind_) {
    case DomainKind::simplex: {
      std::vector<Vec> v;
      for (int i = 0; i < dim_; ++i) {
        Vec e(dim_, 0.0);
        e[i] = 1.0;
        v.push_back(std::move(e));
      }
      return v;
    }
    case DomainKind::box: {
      if (dim_ > 16) throw std::invalid_argument("box vertex enumeration limited to dim <= 16");
      std::vector<Vec> v;
      for (uint32_t m = 0; m < (1u << dim_); ++m) {
        Vec c(dim_);
        for (int i = 0; i < dim_; ++i) c[i] = (m >> i) & 1u ? hi_ : lo_;
        v.push_back(std::move(c));
      }
      return v;
    }
    case DomainKind::ball:
      throw std::invalid_argument("balls have no vertices");
    case DomainKind::product: {
      std::vector<Vec> acc{Vec{}};
      for (const auto& f : factors_) {
        auto fv = f.vertices();
        std::vector<Vec> next;
        next.reserve(acc.size() * fv.size());
        for (const auto& head : acc)
          for (const auto& tail : fv) {
            Vec p = head;
            p.insert(p.end(), tail.begin(), tail.end());
            next.push_back(std::move(p));
          }
        acc = std::move(next);
        if (acc.size() > 100000) throw std::invalid_argument("product vertex set too large");
      }
      return acc;
    }
  }
  return {};
}

Vec Domain::interior_point() const {
  Vec p(dim_);
  switch (kind_) {
    case DomainKind::simplex:
      std::fill(p.begin(), p.end(), 1.0 / dim_);
      break;
    case DomainKind::box:
      std::fill(p.begin(), p.end(), 0.5 * (lo_ + hi_));
      break;
    case DomainKind::ball:
      p = center_;
      break;
    case DomainKind::product:
      for (size_t i = 0; i < factors_.size(); ++i) {
        Vec f = factors_[i].interior_point();
        std::copy(f.begin(), f.end(), p.begin() + offsets_[i]);
      }
      break;
  }
  return p;
}

double Domain::diameter() const {
  switch (kind_) {
    case DomainKind::simplex:
      return dim_ == 1 ? 0.0 : std::numbers::sqrt2;
    case DomainKind::box:
      return (hi_ - lo_) * std::sqrt(static_cast<double>(dim_));
    case DomainKind::ball:
      return 2.0 * radius_;
    case DomainKind::product: {
      double s = 0.0;
      for (const auto& f : factors_) s += f.diameter() * f.diameter();
      return std::sqrt(s);
    }
  }
  return 0.0;
}

bool Domain::operator==(const Domain& other) const {
  if (kind_ != other.kind_ || dim_ != other.dim_) return false;
  switch (kind_) {
    case DomainKind::simplex:
      return true;
    case DomainKind::box:
      return lo_ == other.lo_ && hi_ == other.hi_;
    case DomainKind::ball:
      return radius_ == other.radius_ && center_ == other.center_;
    case DomainKind::product:
      return factors_ == other.factors_;
  }
  return false;
}

}  // namespace mdvi
