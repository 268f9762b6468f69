// numeric.hpp - small numeric kernel shared across the library:
// deterministic RNG helpers, compensated sums, the inverse normal CDF,
// adaptive Simpson quadrature and a symmetric power iteration.
#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace perfbound {

// ---------------------------------------------------------------- RNG

// mt19937_64 is bit-identical across platforms; the distributions in
// <random> are not, so we roll the few draws we need by hand.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t raw() { return eng_(); }

  // uniform double in [0, 1) with 53 random bits
  double unit() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }

  // unbiased integer in [0, n) via rejection
  std::uint64_t below(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("Rng::below: n == 0");
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t v;
    do {
      v = eng_();
    } while (v >= limit);
    return v % n;
  }

  bool bernoulli(double p) { return unit() < p; }

  // Fisher-Yates permutation of 0..n-1
  std::vector<int> permutation(int n) {
    std::vector<int> idx(n);
    for (int i = 0; i < n; ++i) idx[i] = i;
    for (int i = n - 1; i > 0; --i) {
      const int j = static_cast<int>(below(static_cast<std::uint64_t>(i) + 1));
      std::swap(idx[i], idx[j]);
    }
    return idx;
  }

 private:
  std::mt19937_64 eng_;
};

// ---------------------------------------------------------------- sums

// Neumaier-compensated sum; keeps empirical risks reproducible and
// accurate enough for line-search accept tests near the optimum.
class KahanSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline double sq_dist(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

inline double euclid(std::span<const double> a, std::span<const double> b) {
  return std::sqrt(sq_dist(a, b));
}

// ------------------------------------------------- inverse normal CDF

namespace detail {

inline double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// Acklam's rational approximation for Phi^-1, ~1e-9 on its own.
inline double norm_ppf_seed(double p) {
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425, phigh = 1 - plow;
  if (p < plow) {
    const double q = std::sqrt(-2 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  }
  if (p > phigh) {
    const double q = std::sqrt(-2 * std::log(1 - p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  }
  const double q = p - 0.5, r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1);
}

// two Newton polish steps against erfc bring the seed to ~1e-15
inline double norm_ppf(double p) {
  double x = norm_ppf_seed(p);
  for (int it = 0; it < 2; ++it) {
    const double err = norm_cdf(x) - p;
    const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
    if (pdf <= 0) break;
    x -= err / pdf;
  }
  return x;
}

}  // namespace detail

// (1 - delta/2)-quantile of the standard normal. Domain (0, 1];
// delta = 1 gives the median 0.
inline double normal_quantile(double delta) {
  if (!(delta > 0.0) || delta > 1.0)
    throw std::invalid_argument("normal_quantile: delta must be in (0, 1]");
  if (delta == 1.0) return 0.0;
  return detail::norm_ppf(1.0 - 0.5 * delta);
}

// ------------------------------------------------- adaptive quadrature

struct QuadConfig {
  double abs_tol = 1e-8;
  int max_depth = 48;
};

struct QuadError : std::runtime_error {
  double partial;
  explicit QuadError(const std::string& msg, double part)
      : std::runtime_error(msg), partial(part) {}
};

namespace detail {

inline double simpson(double a, double b, double fa, double fm, double fb) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

inline double adaptive_simpson_rec(const std::function<double(double)>& f, double a,
                                   double b, double fa, double fm, double fb,
                                   double whole, double tol, int depth,
                                   bool* converged) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = simpson(a, m, fa, flm, fm);
  const double right = simpson(m, b, fm, frm, fb);
  const double delta = left + right - whole;
  if (std::abs(delta) <= 15.0 * tol || (b - a) < 1e-12)
    return left + right + delta / 15.0;
  if (depth <= 0) {
    *converged = false;
    return left + right + delta / 15.0;
  }
  return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1,
                              converged) +
         adaptive_simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1,
                              converged);
}

}  // namespace detail

// Adaptive Simpson on [a, b]; throws QuadError (carrying the partial
// value) when the recursion depth limit is hit before the tolerance.
inline double adaptive_simpson(const std::function<double(double)>& f, double a,
                               double b, const QuadConfig& cfg = {}) {
  if (!(b > a)) return 0.0;
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = detail::simpson(a, b, fa, fm, fb);
  bool converged = true;
  const double v = detail::adaptive_simpson_rec(f, a, b, fa, fm, fb, whole,
                                                cfg.abs_tol, cfg.max_depth,
                                                &converged);
  if (!converged) throw QuadError("adaptive_simpson: depth limit reached", v);
  return v;
}

// ------------------------------------------ symmetric power iteration

// Largest eigenvalue of a dense symmetric matrix (row-major, dim x dim).
inline double power_iteration_max_eig(std::span<const double> mat, int dim,
                                      int iters = 500) {
  std::vector<double> v(dim, 1.0 / std::sqrt(static_cast<double>(dim)));
  std::vector<double> w(dim);
  double lambda = 0.0;
  for (int it = 0; it < iters; ++it) {
    for (int i = 0; i < dim; ++i) {
      double s = 0.0;
      for (int j = 0; j < dim; ++j) s += mat[static_cast<std::size_t>(i) * dim + j] * v[j];
      w[i] = s;
    }
    const double nw = norm2(w);
    if (nw == 0.0) return 0.0;
    for (int i = 0; i < dim; ++i) v[i] = w[i] / nw;
    lambda = nw;
  }
  // Rayleigh quotient of the final iterate
  for (int i = 0; i < dim; ++i) {
    double s = 0.0;
    for (int j = 0; j < dim; ++j) s += mat[static_cast<std::size_t>(i) * dim + j] * v[j];
    w[i] = s;
  }
  (void)lambda;
  return dot(v, w);
}

// Smallest eigenvalue via two shifted power iterations.
inline double power_iteration_min_eig(std::span<const double> mat, int dim,
                                      int iters = 500) {
  const double mu = power_iteration_max_eig(mat, dim, iters);
  // shift so the smallest eigenvalue of `mat` becomes the largest of (mu I - A)
  std::vector<double> shifted(mat.begin(), mat.end());
  const double s = std::abs(mu) + 1.0;
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) {
      const std::size_t k = static_cast<std::size_t>(i) * dim + j;
      shifted[k] = (i == j ? s : 0.0) - mat[k];
    }
  }
  const double top = power_iteration_max_eig(shifted, dim, iters);
  return s - top;
}

// ---------------------------------------------------------------- misc

// FNV-1a, used to stamp reports with the profile they were computed from
inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ull;
  for (const char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ull;
  }
  return h;
}

// (r^T - 1)/(r - 1) with the analytic limit T at r == 1; the limit is
// used within |r-1| < 1e-9 to avoid cancellation.
inline double geometric_factor(double ratio, int T) {
  if (T < 0) throw std::invalid_argument("geometric_factor: T < 0");
  if (T == 0) return 0.0;
  if (std::abs(ratio - 1.0) < 1e-9) return static_cast<double>(T);
  return (std::pow(ratio, T) - 1.0) / (ratio - 1.0);
}

inline double sigmoid(double t) {
  if (t >= 0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

// log(1 + e^u), overflow-safe
inline double softplus(double u) {
  if (u > 0) return u + std::log1p(std::exp(-u));
  return std::log1p(std::exp(u));
}

}  // namespace perfbound
