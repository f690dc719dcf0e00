#ifndef MDVI_SCHEDULE_HPP
#define MDVI_SCHEDULE_HPP

#include <cmath>
#include <stdexcept>

namespace mdvi {

// Weight pair (lambda(t), eta(t)) of the dynamics, with exact running
// integrals. `power` means lambda(t) = (1+t)^-a, eta(t) = (1+t)^-b with
// a, b in [0,1]; both kinds are positive, C^1 and nonincreasing.
class Schedule {
 public:
  enum class Kind { constant, power };

  static Schedule constant(double lam, double eta) {
    if (!(lam > 0.0) || !(eta > 0.0))
      throw std::invalid_argument("constant schedule requires lambda, eta > 0");
    Schedule s;
    s.kind_ = Kind::constant;
    s.lam_ = lam;
    s.eta_ = eta;
    return s;
  }

  static Schedule power(double a, double b) {
    if (!(a >= 0.0 && a <= 1.0) || !(b >= 0.0 && b <= 1.0))
      throw std::invalid_argument("power schedule requires a, b in [0,1]");
    Schedule s;
    s.kind_ = Kind::power;
    s.a_ = a;
    s.b_ = b;
    return s;
  }

  Kind kind() const { return kind_; }
  double a() const { return a_; }
  double b() const { return b_; }

  double lambda(double t) const {
    check_t(t);
    return kind_ == Kind::constant ? lam_ : std::exp(-a_ * std::log1p(t));
  }

  double eta(double t) const {
    check_t(t);
    return kind_ == Kind::constant ? eta_ : std::exp(-b_ * std::log1p(t));
  }

  // S(t) = int_0^t lambda
  double S(double t) const {
    check_t(t);
    return kind_ == Kind::constant ? lam_ * t : power_integral(a_, t);
  }

  // L^2(t) = int_0^t lambda^2
  double Lsq(double t) const {
    check_t(t);
    return kind_ == Kind::constant ? lam_ * lam_ * t : power_integral(2.0 * a_, t);
  }

  double L(double t) const { return std::sqrt(Lsq(t)); }

  // int_0^t lambda^2 eta, the noise term of the gap bounds
  double lam_sq_eta_integral(double t) const {
    check_t(t);
    return kind_ == Kind::constant ? lam_ * lam_ * eta_ * t : power_integral(2.0 * a_ + b_, t);
  }

 private:
  Schedule() = default;

  static void check_t(double t) {
    if (!(t >= 0.0)) throw std::invalid_argument("schedule time must be >= 0");
  }

  // int_0^t (1+s)^-e ds, stable across e -> 1
  static double power_integral(double e, double t) {
    if (e == 1.0) return std::log1p(t);
    return std::expm1((1.0 - e) * std::log1p(t)) / (1.0 - e);
  }

  Kind kind_ = Kind::constant;
  double lam_ = 1.0, eta_ = 1.0;  // constant kind
  double a_ = 0.0, b_ = 0.0;      // power kind
};

}  // namespace mdvi

#endif
