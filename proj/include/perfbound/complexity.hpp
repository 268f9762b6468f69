// complexity.hpp - covering-number entropy integrals for parametric
// Lipschitz classes, via the log(1 + 2LR/eps) covering bound and
// adaptive Simpson quadrature.
#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "perfbound/numeric.hpp"

namespace perfbound {

struct ClassSpec {
  int param_dim = 1;
  double param_radius = 1.0;     // Euclidean radius of Theta
  double param_lipschitz = 1.0;  // Lipschitz constant of theta -> f_theta, uniform norm
  double output_bound = 1.0;     // F

  void validate() const {
    if (param_dim < 1 || !(param_radius > 0.0) || !(param_lipschitz > 0.0) ||
        !(output_bound > 0.0))
      throw std::invalid_argument("ClassSpec: all fields must be positive");
  }

  // sup-norm diameter of the class under the Lipschitz-in-parameter bound
  double diameter() const { return 2.0 * param_lipschitz * param_radius; }
};

// Parametric covering bound: dim * log(1 + 2 L R / eps), and 0 once a
// single ball covers the class (eps >= diameter).
inline double covering_log_bound(const ClassSpec& spec, double eps) {
  spec.validate();
  if (!(eps > 0.0)) throw std::invalid_argument("covering_log_bound: eps must be > 0");
  if (eps >= spec.diameter()) return 0.0;
  return spec.param_dim * std::log1p(2.0 * spec.param_lipschitz * spec.param_radius / eps);
}

namespace detail {

// integral of sqrt(covering_log_bound) over (0, upper]; the sqrt-log
// singularity at 0 is handled by the substitution eps = s e^{-u}, which
// makes the left piece smooth and rapidly decaying
inline double entropy_integral_to(const ClassSpec& spec, double upper,
                                  const QuadConfig& quad) {
  if (upper <= 0.0) return 0.0;
  const auto integrand = [&spec](double eps) {
    return std::sqrt(covering_log_bound(spec, eps));
  };
  const double split = std::min(0.25 * upper, 0.5);
  QuadConfig half = quad;
  half.abs_tol = 0.5 * quad.abs_tol;

  double left = 0.0;
  {
    // eps = split * e^{-u}; du-integrand = split e^{-u} f(split e^{-u}).
    // u_max = 60 leaves a tail below 1e-24 of the total.
    const auto g = [&](double u) {
      const double eps = split * std::exp(-u);
      return eps * integrand(eps);
    };
    left = adaptive_simpson(g, 0.0, 60.0, half);
  }
  const double right =
      upper > split ? adaptive_simpson(integrand, split, upper, half) : 0.0;
  return left + right;
}

}  // namespace detail

// Entropy integral in the uniform norm: integrate sqrt(log N) over
// (0, eps_max] where the covering bound vanishes beyond eps_max.
inline double entropy_integral_inf(const ClassSpec& spec, const QuadConfig& quad = {}) {
  spec.validate();
  if (!(quad.abs_tol > 0.0))
    throw std::invalid_argument("entropy_integral_inf: quad tolerance must be > 0");
  return detail::entropy_integral_to(spec, spec.diameter(), quad);
}

// L2(d) version: ||.||_{L2(d)} <= ||.||_inf uniformly in d, so the same
// covering bound dominates; the integration range is (0, 1].
inline double entropy_integral_l2(const ClassSpec& spec, const QuadConfig& quad = {}) {
  spec.validate();
  if (!(quad.abs_tol > 0.0))
    throw std::invalid_argument("entropy_integral_l2: quad tolerance must be > 0");
  return detail::entropy_integral_to(spec, std::min(1.0, spec.diameter()), quad);
}

}  // namespace perfbound
