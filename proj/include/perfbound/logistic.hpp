// logistic.hpp - L2-regularized logistic model: stable loss/gradient,
// a deterministic projected gradient-descent ERM solver, and the
// closed-form Lipschitz constants the bound formulas need.
#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "perfbound/core.hpp"
#include "perfbound/numeric.hpp"

namespace perfbound {

// Parameter vector; when the bias is in use it is folded in as the last
// coordinate against an appended constant-1 feature.
struct ParamVector {
  std::vector<double> v;

  int dim() const { return static_cast<int>(v.size()); }
};

struct FitConfig {
  double reg_lambda = 1.0;  // = gamma, strong convexity modulus
  double grad_tol = 1e-8;
  int max_iters = 10000;
  std::uint64_t seed = 0;   // kept for config hashing; the zero init makes it inert
  bool add_bias = true;

  void validate() const {
    if (!(reg_lambda > 0.0)) throw std::invalid_argument("FitConfig: reg_lambda <= 0");
    if (!(grad_tol > 0.0)) throw std::invalid_argument("FitConfig: grad_tol <= 0");
    if (max_iters < 1) throw std::invalid_argument("FitConfig: max_iters < 1");
  }
};

inline int param_dim(int n_features, bool add_bias) {
  return n_features + (add_bias ? 1 : 0);
}

// theta^T [x; 1] (or theta^T x without the bias fold)
inline double logit_score(std::span<const double> theta, std::span<const double> x,
                          bool add_bias) {
  const std::size_t nx = x.size();
  if (theta.size() != nx + (add_bias ? 1 : 0))
    throw std::invalid_argument("logit_score: theta/feature dimension mismatch");
  double u = add_bias ? theta[nx] : 0.0;
  for (std::size_t i = 0; i < nx; ++i) u += theta[i] * x[i];
  return u;
}

inline void check_binary_label(double y) {
  if (y != 0.0 && y != 1.0)
    throw std::invalid_argument("logistic loss: label must be 0 or 1, got " +
                                std::to_string(y));
}

// Cross-entropy in the numerically stable softplus form, plus the
// per-example apportioned regularizer lambda/2 ||theta||^2 (constant
// across examples, so the weighted mean equals mean loss + lambda/2 ||theta||^2).
inline double logistic_loss(double y, std::span<const double> x,
                            std::span<const double> theta, double reg_lambda,
                            bool add_bias = true) {
  check_binary_label(y);
  const double u = logit_score(theta, x, add_bias);
  const double ce = softplus(u) - y * u;
  return ce + 0.5 * reg_lambda * dot(theta, theta);
}

// (sigma(u) - y) [x; 1] + lambda theta
inline std::vector<double> logistic_grad(double y, std::span<const double> x,
                                         std::span<const double> theta,
                                         double reg_lambda, bool add_bias = true) {
  check_binary_label(y);
  const double u = logit_score(theta, x, add_bias);
  const double r = sigmoid(u) - y;
  std::vector<double> g(theta.size());
  for (std::size_t i = 0; i < x.size(); ++i) g[i] = r * x[i] + reg_lambda * theta[i];
  if (add_bias) g[x.size()] = r + reg_lambda * theta[x.size()];
  return g;
}

// Weighted empirical risk: sum_i w_i ce_i + lambda/2 ||theta||^2.
// Compensated summation keeps line-search accept decisions meaningful
// near the optimum at large n.
inline double empirical_risk(const EmpiricalDistribution& d,
                             std::span<const double> theta, double reg_lambda,
                             bool add_bias = true) {
  if (d.box().dim_y != 1)
    throw std::invalid_argument("empirical_risk: expects a single label coordinate");
  KahanSum s;
  for (int i = 0; i < d.n(); ++i) {
    check_binary_label(d.label(i));
    const double u = logit_score(theta, d.features(i), add_bias);
    s.add(d.weight(i) * (softplus(u) - d.label(i) * u));
  }
  return s.value() + 0.5 * reg_lambda * dot(theta, theta);
}

inline std::vector<double> empirical_risk_grad(const EmpiricalDistribution& d,
                                               std::span<const double> theta,
                                               double reg_lambda,
                                               bool add_bias = true) {
  std::vector<double> g(theta.size(), 0.0);
  for (int i = 0; i < d.n(); ++i) {
    const auto x = d.features(i);
    const double u = logit_score(theta, x, add_bias);
    const double r = d.weight(i) * (sigmoid(u) - d.label(i));
    for (std::size_t j = 0; j < x.size(); ++j) g[j] += r * x[j];
    if (add_bias) g[x.size()] += r;
  }
  for (std::size_t j = 0; j < g.size(); ++j) g[j] += reg_lambda * theta[static_cast<int>(j)];
  return g;
}

// Hessian of the regularized empirical risk (dense, row-major).
inline std::vector<double> empirical_risk_hessian(const EmpiricalDistribution& d,
                                                  std::span<const double> theta,
                                                  double reg_lambda,
                                                  bool add_bias = true) {
  const int dim = static_cast<int>(theta.size());
  std::vector<double> h(static_cast<std::size_t>(dim) * dim, 0.0);
  std::vector<double> xt(static_cast<std::size_t>(dim));
  for (int i = 0; i < d.n(); ++i) {
    const auto x = d.features(i);
    for (std::size_t j = 0; j < x.size(); ++j) xt[j] = x[j];
    if (add_bias) xt[x.size()] = 1.0;
    const double u = logit_score(theta, x, add_bias);
    const double sig = sigmoid(u);
    const double c = d.weight(i) * sig * (1.0 - sig);
    for (int a = 0; a < dim; ++a)
      for (int b = 0; b < dim; ++b)
        h[static_cast<std::size_t>(a) * dim + b] += c * xt[static_cast<std::size_t>(a)] * xt[static_cast<std::size_t>(b)];
  }
  for (int a = 0; a < dim; ++a) h[static_cast<std::size_t>(a) * dim + a] += reg_lambda;
  return h;
}

struct FitResult {
  ParamVector theta;
  double grad_norm = 0.0;
  int iters = 0;
  double risk = 0.0;
  std::uint64_t config_hash = 0;
};

struct FitError : std::runtime_error {
  ParamVector last_theta;
  double grad_norm;
  int iters;
  FitError(const std::string& msg, ParamVector th, double gn, int it)
      : std::runtime_error(msg), last_theta(std::move(th)), grad_norm(gn), iters(it) {}
};

namespace detail {

inline std::uint64_t fit_config_hash(const FitConfig& cfg, int dim) {
  std::string s = std::to_string(cfg.reg_lambda) + "|" + std::to_string(cfg.grad_tol) +
                  "|" + std::to_string(cfg.max_iters) + "|" + std::to_string(cfg.seed) +
                  "|" + std::to_string(cfg.add_bias) + "|" + std::to_string(dim);
  return fnv1a(s);
}

// certified smoothness bound for the step-size seed:
// lambda + max_i ||x_i~||^2 / 4
inline double smoothness_bound(const EmpiricalDistribution& d, double reg_lambda,
                               bool add_bias) {
  double mx = 0.0;
  for (int i = 0; i < d.n(); ++i) {
    const auto x = d.features(i);
    double s = add_bias ? 1.0 : 0.0;
    for (const double v : x) s += v * v;
    mx = std::max(mx, s);
  }
  return reg_lambda + 0.25 * mx;
}

}  // namespace detail

// Deterministic projected gradient descent with a monotone line search.
// Stops on the projected-gradient residual; for interior solutions this
// equals the plain gradient norm. Unique minimizer by strong convexity.
inline FitResult erm_fit(const EmpiricalDistribution& dist, const ParamSpace& space,
                         const FitConfig& cfg,
                         const ParamVector* warm_start = nullptr) {
  cfg.validate();
  const int dim = param_dim(dist.box().dim_x, cfg.add_bias);
  if (space.dim() != dim)
    throw std::invalid_argument("erm_fit: ParamSpace dimension mismatch");

  std::vector<double> theta(static_cast<std::size_t>(dim), 0.0);
  if (warm_start) {
    if (warm_start->dim() != dim)
      throw std::invalid_argument("erm_fit: warm start dimension mismatch");
    theta = warm_start->v;
  }
  space.project(theta);

  const double lip = detail::smoothness_bound(dist, cfg.reg_lambda, cfg.add_bias);
  // 1/L never overshoots (lip certifies the Hessian), so every iteration
  // contracts the gradient; backtracking below is an fp safety net
  const double alpha0 = 1.0 / lip;
  double f = empirical_risk(dist, theta, cfg.reg_lambda, cfg.add_bias);

  std::vector<double> cand(theta.size());
  for (int iter = 0; iter < cfg.max_iters; ++iter) {
    std::vector<double> g = empirical_risk_grad(dist, theta, cfg.reg_lambda, cfg.add_bias);
    const double gnorm = norm2(g);

    // projected-gradient residual ||theta - Pi(theta - g)||
    cand = theta;
    for (std::size_t j = 0; j < cand.size(); ++j) cand[j] -= g[j];
    space.project(cand);
    double res = 0.0;
    for (std::size_t j = 0; j < cand.size(); ++j) {
      const double dlt = theta[j] - cand[j];
      res += dlt * dlt;
    }
    res = std::sqrt(res);
    if (res <= cfg.grad_tol) {
      FitResult out;
      out.theta.v = theta;
      out.grad_norm = gnorm;
      out.iters = iter;
      out.risk = f;
      out.config_hash = detail::fit_config_hash(cfg, dim);
      return out;
    }

    // monotone backtracking; measured f never increases beyond fp noise
    double alpha = alpha0;
    const double noise = 8.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(f));
    bool accepted = false;
    while (alpha > 1e-18 / lip) {
      for (std::size_t j = 0; j < cand.size(); ++j) cand[j] = theta[j] - alpha * g[j];
      space.project(cand);
      const double fc = empirical_risk(dist, cand, cfg.reg_lambda, cfg.add_bias);
      if (fc <= f + noise) {
        theta = cand;
        f = std::min(f, fc);
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      ParamVector last;
      last.v = theta;
      throw FitError("erm_fit: line search stalled at gradient norm " +
                         std::to_string(gnorm),
                     std::move(last), gnorm, iter);
    }
  }

  std::vector<double> g = empirical_risk_grad(dist, theta, cfg.reg_lambda, cfg.add_bias);
  ParamVector last;
  last.v = theta;
  throw FitError("erm_fit: max_iters reached before gradient tolerance (||g|| = " +
                     std::to_string(norm2(g)) + ")",
                 std::move(last), norm2(g), cfg.max_iters);
}

// ------------------------------------------------ closed-form constants

// L_ell = D_Z / (1 + exp(-D_Z * D_Theta))
inline double lipschitz_loss_constant(double D_Z, double D_Theta) {
  if (!(D_Z > 0.0) || !(D_Theta > 0.0))
    throw std::invalid_argument("lipschitz_loss_constant: diameters must be positive");
  return D_Z / (1.0 + std::exp(-D_Z * D_Theta));
}

// L_a = D_X / gamma, L_a~ = 1/(1 + L_a)
inline std::pair<double, double> argmin_lipschitz_constant(double D_X, double gamma) {
  if (!(gamma > 0.0)) throw std::invalid_argument("argmin_lipschitz_constant: gamma <= 0");
  if (D_X < 0.0) throw std::invalid_argument("argmin_lipschitz_constant: D_X < 0");
  const double L_a = D_X / gamma;
  return {L_a, 1.0 / (1.0 + L_a)};
}

// sigma' <= 1/4, so ||grad_x f_theta|| <= ||theta||/4
inline double prediction_lipschitz_constant(double theta_radius) {
  if (theta_radius < 0.0)
    throw std::invalid_argument("prediction_lipschitz_constant: radius < 0");
  return 0.25 * theta_radius;
}

// standard logistic Hessian bound; the smoothness constant is never
// pinned numerically upstream, so this default is implementer-supplied
inline double default_kappa(double D_Z, double gamma) {
  return 0.25 * D_Z * D_Z + gamma;
}

inline double predict_probability(std::span<const double> theta,
                                  std::span<const double> x, bool add_bias = true) {
  return sigmoid(logit_score(theta, x, add_bias));
}

}  // namespace perfbound
