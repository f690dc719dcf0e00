#include "mdvi/noise.hpp"

#include <cmath>
#include <numbers>

namespace mdvi {

NoiseModel NoiseModel::zero(int n) {
  NoiseModel m;
  m.kind_ = Kind::zero;
  m.rows_ = n;
  m.cols_ = n;
  return m;
}

NoiseModel NoiseModel::constant_volatility(Mat sigma) {
  if (sigma.empty()) throw std::invalid_argument("volatility matrix must be nonempty");
  NoiseModel m;
  m.kind_ = Kind::constant_volatility;
  m.rows_ = sigma.rows;
  m.cols_ = sigma.cols;
  m.sigma_star_ = frobenius(sigma);
  m.base_ = std::move(sigma);
  return m;
}

NoiseModel NoiseModel::state_scaled(Mat base) {
  if (base.empty()) throw std::invalid_argument("volatility matrix must be nonempty");
  NoiseModel m;
  m.kind_ = Kind::state_scaled;
  m.rows_ = base.rows;
  m.cols_ = base.cols;
  m.sigma_star_ = frobenius(base);
  m.lipschitz_ = m.sigma_star_;  // |r/(1+r) - r'/(1+r')| <= |r - r'| <= ||x-x'||_2
  m.base_ = std::move(base);
  return m;
}

NoiseModel NoiseModel::decaying(int n, double sigma0) {
  if (n < 1) throw std::invalid_argument("decaying noise needs dimension >= 1");
  if (!(sigma0 >= 0.0)) throw std::invalid_argument("sigma0 must be >= 0");
  NoiseModel m;
  m.kind_ = Kind::decaying;
  m.rows_ = n;
  m.cols_ = n;
  m.sigma0_ = sigma0;
  m.sigma_star_ = sigma0;  // beta(0) = sigma0 / log(e) = sigma0
  return m;
}

double NoiseModel::beta(double t) const { return sigma0_ / std::log(std::numbers::e + t); }

namespace {
inline double state_scale(std::span<const double> x) {
  double r = norm2(x);
  return r / (1.0 + r);
}
}  // namespace

void NoiseModel::volatility(std::span<const double> x, double t, std::span<double> out) const {
  switch (kind_) {
    case Kind::zero:
      std::fill(out.begin(), out.end(), 0.0);
      return;
    case Kind::constant_volatility:
      std::copy(base_.a.begin(), base_.a.end(), out.begin());
      return;
    case Kind::state_scaled: {
      double s = state_scale(x);
      for (size_t i = 0; i < base_.a.size(); ++i) out[i] = s * base_.a[i];
      return;
    }
    case Kind::decaying: {
      std::fill(out.begin(), out.end(), 0.0);
      double v = beta(t) / std::sqrt(static_cast<double>(rows_));
      for (int i = 0; i < rows_; ++i) out[static_cast<size_t>(i) * cols_ + i] = v;
      return;
    }
  }
}

void NoiseModel::apply(std::span<const double> x, double t, std::span<const double> xi,
                       std::span<double> out) const {
  switch (kind_) {
    case Kind::zero:
      std::fill(out.begin(), out.end(), 0.0);
      return;
    case Kind::constant_volatility:
    case Kind::state_scaled: {
      double s = kind_ == Kind::state_scaled ? state_scale(x) : 1.0;
      for (int i = 0; i < rows_; ++i) {
        double acc = 0.0;
        const double* row = base_.a.data() + static_cast<size_t>(i) * cols_;
        for (int j = 0; j < cols_; ++j) acc += row[j] * xi[static_cast<size_t>(j)];
        out[static_cast<size_t>(i)] = s * acc;
      }
      return;
    }
    case Kind::decaying: {
      double v = beta(t) / std::sqrt(static_cast<double>(rows_));
      for (int i = 0; i < rows_; ++i) out[static_cast<size_t>(i)] = v * xi[static_cast<size_t>(i)];
      return;
    }
  }
}

}  // namespace mdvi
