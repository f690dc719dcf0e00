#ifndef MDVI_NOISE_HPP
#define MDVI_NOISE_HPP

#include <span>

#include "mdvi/common.hpp"

namespace mdvi {

// Volatility matrix sigma(x,t) of the Ito perturbation, an n x d matrix with
// a uniform Frobenius-norm bound sigma_star.
//
//   zero                 sigma = 0
//   constant_volatility  sigma(x,t) = C                     sigma* = ||C||_F
//   state_scaled         sigma(x,t) = C * r/(1+r), r=||x||2 sigma* = ||C||_F, Lipschitz ||C||_F
//   decaying             sigma(x,t) = (beta(t)/sqrt(n)) I,  beta(t) = sigma0/log(e+t)
//
// The decaying kind normalizes so that ||sigma(x,t)||_F = beta(t) exactly.
class NoiseModel {
 public:
  enum class Kind { zero, constant_volatility, state_scaled, decaying };

  static NoiseModel zero(int n = 0);
  static NoiseModel constant_volatility(Mat sigma);
  static NoiseModel state_scaled(Mat base);
  static NoiseModel decaying(int n, double sigma0);

  Kind kind() const { return kind_; }
  int rows() const { return rows_; }
  int cols() const { return cols_; }
  bool is_zero() const { return kind_ == Kind::zero; }

  double sigma_star() const { return sigma_star_; }
  double lipschitz() const { return lipschitz_; }
  double sigma0() const { return sigma0_; }

  // beta(t) = sigma0 / log(e + t); only meaningful for the decaying kind.
  double beta(double t) const;

  // Writes sigma(x,t) row-major into out (rows()*cols() entries).
  void volatility(std::span<const double> x, double t, std::span<double> out) const;

  // out_i = sum_j sigma(x,t)_{ij} xi_j without materializing sigma.
  void apply(std::span<const double> x, double t, std::span<const double> xi,
             std::span<double> out) const;

 private:
  NoiseModel() = default;
  Kind kind_ = Kind::zero;
  int rows_ = 0, cols_ = 0;
  Mat base_;
  double sigma_star_ = 0.0;
  double lipschitz_ = 0.0;
  double sigma0_ = 0.0;
};

}  // namespace mdvi

#endif
