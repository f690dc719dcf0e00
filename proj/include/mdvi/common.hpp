#ifndef MDVI_COMMON_HPP
#define MDVI_COMMON_HPP

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mdvi {

using Vec = std::vector<double>;

// Error taxonomy used across the library.
struct DomainMembershipError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NumericInputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct OracleFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DegenerateDataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
// Carries the last time at which the state was still finite.
struct NumericDivergence : std::runtime_error {
  explicit NumericDivergence(double t)
      : std::runtime_error("state became non-finite after t=" + std::to_string(t)),
        last_valid_t(t) {}
  double last_valid_t;
};

// Small dense row-major matrix. Enough for the operator kinds in this library;
// spectral checks go through Eigen maps over `a`.
struct Mat {
  int rows = 0;
  int cols = 0;
  Vec a;

  Mat() = default;
  Mat(int r, int c, double fill = 0.0) : rows(r), cols(c), a(static_cast<size_t>(r) * c, fill) {}
  static Mat identity(int n) {
    Mat m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }
  double& operator()(int i, int j) { return a[static_cast<size_t>(i) * cols + j]; }
  double operator()(int i, int j) const { return a[static_cast<size_t>(i) * cols + j]; }
  bool empty() const { return rows == 0 || cols == 0; }
};

inline double dot(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

inline double norm2(std::span<const double> x) { return std::sqrt(dot(x, x)); }

inline double norm1(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += std::fabs(v);
  return s;
}

inline double norm_inf(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s = std::max(s, std::fabs(v));
  return s;
}

inline double frobenius(const Mat& m) {
  double s = 0.0;
  for (double v : m.a) s += v * v;
  return std::sqrt(s);
}

inline bool all_finite(std::span<const double> x) {
  for (double v : x)
    if (!std::isfinite(v)) return false;
  return true;
}

// out = A x + b (b optional). Row-major, no aliasing.
inline void affine_apply(const Mat& A, std::span<const double> x, const Vec& b,
                         std::span<double> out) {
  for (int i = 0; i < A.rows; ++i) {
    double s = b.empty() ? 0.0 : b[static_cast<size_t>(i)];
    const double* row = A.a.data() + static_cast<size_t>(i) * A.cols;
    for (int j = 0; j < A.cols; ++j) s += row[j] * x[static_cast<size_t>(j)];
    out[static_cast<size_t>(i)] = s;
  }
}

// Order-independent pairwise sum; used for ensemble reductions so results do not
// depend on the worker count.
inline double pairwise_sum(std::span<const double> x) {
  if (x.size() <= 8) {
    double s = 0.0;
    for (double v : x) s += v;
    return s;
  }
  size_t half = x.size() / 2;
  return pairwise_sum(x.first(half)) + pairwise_sum(x.subspan(half));
}

}  // namespace mdvi

#endif
