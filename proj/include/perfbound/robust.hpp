// robust.hpp - numerical evaluation of the Wasserstein-ball min-max /
// min-min risk functionals behind the generalization-gap bounds: the
// dual surrogate, a primal enumeration oracle, and the sandwich check.
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "perfbound/bounds.hpp"
#include "perfbound/core.hpp"
#include "perfbound/logistic.hpp"
#include "perfbound/numeric.hpp"
#include "perfbound/transport.hpp"

namespace perfbound {

// Candidate perturbation targets: a finite grid of points in the box.
struct PointGrid {
  std::vector<double> flat;
  int dim = 0;

  int size() const { return dim == 0 ? 0 : static_cast<int>(flat.size()) / dim; }
  std::span<const double> point(int i) const {
    return {flat.data() + static_cast<std::size_t>(i) * dim, static_cast<std::size_t>(dim)};
  }
  void add(std::span<const double> p) {
    if (dim == 0) dim = static_cast<int>(p.size());
    if (static_cast<int>(p.size()) != dim)
      throw std::invalid_argument("PointGrid: mixed dimensions");
    flat.insert(flat.end(), p.begin(), p.end());
  }
  static PointGrid from_support(const EmpiricalDistribution& d) {
    PointGrid g;
    for (int i = 0; i < d.n(); ++i) g.add(d.point(i));
    return g;
  }
};

struct BallSpec {
  double radius = 0.0;
  double p = 2.0;
};

namespace detail {

inline double grid_loss(std::span<const double> z, std::span<const double> theta,
                        bool add_bias) {
  // z = (y, x) with a single label coordinate; unregularized loss
  const double y = z[0];
  return logistic_loss(y, z.subspan(1), theta, 0.0, add_bias);
}

}  // namespace detail

// phi_{lambda,theta}(z) = max over grid z' of loss(z') - lambda ||z-z'||^p.
// With z itself in the grid this is >= loss(z); non-increasing in lambda.
inline double dual_phi(std::span<const double> z, const ParamVector& theta,
                       double lambda, const PointGrid& grid, double p,
                       bool add_bias = true) {
  if (lambda < 0.0) throw std::invalid_argument("dual_phi: lambda must be >= 0");
  if (grid.size() == 0) throw std::invalid_argument("dual_phi: empty grid");
  double best = -std::numeric_limits<double>::infinity();
  for (int g = 0; g < grid.size(); ++g) {
    const auto zp = grid.point(g);
    const double move = euclid(z, zp);
    const double val =
        detail::grid_loss(zp, theta.v, add_bias) - lambda * std::pow(move, p);
    best = std::max(best, val);
  }
  return best;
}

// lambda grid for the dual: geometric sweep up to 10x the theoretical
// cap L_ell L_f R^{1-p}, plus the cap itself and 0.
inline std::vector<double> make_lambda_grid(double L_ell, double L_f, double R,
                                            double p, int points = 64) {
  if (!(R > 0.0)) throw std::invalid_argument("make_lambda_grid: R must be > 0");
  const double cap = L_ell * L_f * std::pow(R, 1.0 - p);
  std::vector<double> grid;
  grid.push_back(0.0);
  const double lo = 1e-6, hi = std::max(10.0 * cap, 1e-5);
  for (int i = 0; i < points; ++i)
    grid.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / (points - 1)));
  grid.push_back(cap);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

struct DualUpperResult {
  double value = 0.0;
  double lambda_star = 0.0;
};

// min over the lambda grid of lambda R^p + E_d[phi_lambda]; an upper
// bound on the grid-restricted sup of the risk over the W_p ball.
inline DualUpperResult dual_upper(const EmpiricalDistribution& dist,
                                  const ParamVector& theta, double R, double p,
                                  const std::vector<double>& lambda_grid,
                                  const PointGrid& z_grid, bool add_bias = true) {
  if (lambda_grid.empty()) throw std::invalid_argument("dual_upper: empty lambda grid");
  PointGrid grid = z_grid;
  // the support always belongs to the candidate set
  for (int i = 0; i < dist.n(); ++i) grid.add(dist.point(i));
  DualUpperResult best{std::numeric_limits<double>::infinity(), 0.0};
  for (const double lam : lambda_grid) {
    KahanSum mean;
    for (int i = 0; i < dist.n(); ++i)
      mean.add(dist.weight(i) * dual_phi(dist.point(i), theta, lam, grid, p, add_bias));
    const double v = lam * std::pow(R, p) + mean.value();
    if (v < best.value) best = {v, lam};
  }
  return best;
}

// Primal oracle: max risk over all redistributions that move at most
// max_moves support points onto grid targets, subject to W_p <= R
// (checked exactly via transport). A lower bound on the ball supremum.
inline double ball_sup_enumerate(const EmpiricalDistribution& dist,
                                 const ParamVector& theta, double R, double p,
                                 const PointGrid& z_grid, int max_moves,
                                 bool add_bias = true, bool minimize = false) {
  if (dist.n() > 12)
    throw std::invalid_argument("ball_sup_enumerate: support cap is 12 points");
  if (max_moves < 0 || max_moves > 2)
    throw std::invalid_argument("ball_sup_enumerate: max_moves cap is 2");
  const double sign = minimize ? -1.0 : 1.0;

  const auto risk_of = [&](const EmpiricalDistribution& d) {
    return empirical_risk(d, theta.v, 0.0, add_bias);
  };
  double best = sign * risk_of(dist);

  const auto try_candidate = [&](std::vector<double> flat) {
    EmpiricalDistribution cand(dist.box(), std::move(flat), dist.weights());
    if (wp_exact(dist, cand, p).distance <= R + 1e-12)
      best = std::max(best, sign * risk_of(cand));
  };

  const int n = dist.n(), dim = dist.dim(), g = z_grid.size();
  if (max_moves >= 1) {
    for (int i = 0; i < n; ++i)
      for (int a = 0; a < g; ++a) {
        std::vector<double> flat = dist.flat();
        const auto t = z_grid.point(a);
        std::copy(t.begin(), t.end(), flat.begin() + static_cast<std::size_t>(i) * dim);
        try_candidate(std::move(flat));
      }
  }
  if (max_moves >= 2) {
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        for (int a = 0; a < g; ++a)
          for (int b = 0; b < g; ++b) {
            std::vector<double> flat = dist.flat();
            const auto ta = z_grid.point(a);
            const auto tb = z_grid.point(b);
            std::copy(ta.begin(), ta.end(), flat.begin() + static_cast<std::size_t>(i) * dim);
            std::copy(tb.begin(), tb.end(), flat.begin() + static_cast<std::size_t>(j) * dim);
            try_candidate(std::move(flat));
          }
  }
  return sign * best;
}

struct SandwichReport {
  double realized_gap = 0.0;   // risk on shifted population - risk on shifted sample
  double sup_upper = 0.0;      // dual upper bound around the population center
  double inf_lower = 0.0;      // enumerated min around the sample center
  double sandwich = 0.0;       // sup_upper - inf_lower
  double bound_total = 0.0;    // gen_gap_I total at the matching radius
  bool gap_within_sandwich = false;
  bool sandwich_within_bound = false;
};

// Verifies the two inequalities behind the gap bounds at desk scale:
// the realized gap sits inside the sup-minus-inf sandwich, and the
// sandwich is dominated by the closed-form bound at the same radius.
inline SandwichReport sandwich_check(const EmpiricalDistribution& d0_pop,
                                     const EmpiricalDistribution& d0_sample,
                                     const EmpiricalDistribution& shifted_pop,
                                     const EmpiricalDistribution& shifted_sample,
                                     const ParamVector& theta, double R, double p,
                                     const PointGrid& z_grid,
                                     const ConstantsProfile& profile,
                                     double complexity_inf, bool add_bias = true) {
  SandwichReport rep;
  rep.realized_gap = empirical_risk(shifted_pop, theta.v, 0.0, add_bias) -
                     empirical_risk(shifted_sample, theta.v, 0.0, add_bias);
  const auto lambda_grid = make_lambda_grid(profile.L_ell, profile.L_f, R, p);
  PointGrid sup_grid = z_grid;
  for (int i = 0; i < shifted_pop.n(); ++i) sup_grid.add(shifted_pop.point(i));
  rep.sup_upper = dual_upper(d0_pop, theta, R, p, lambda_grid, sup_grid, add_bias).value;

  PointGrid grid = z_grid;
  for (int i = 0; i < d0_sample.n(); ++i) grid.add(d0_sample.point(i));
  for (int i = 0; i < shifted_sample.n(); ++i) grid.add(shifted_sample.point(i));
  rep.inf_lower =
      ball_sup_enumerate(d0_sample, theta, R, p, grid, 2, add_bias, /*minimize=*/true);

  rep.sandwich = rep.sup_upper - rep.inf_lower;
  rep.bound_total =
      gen_gap_I(profile, R, complexity_inf, LipschitzTermForm::dz_power, d0_sample.n())
          .total;
  rep.gap_within_sandwich = rep.realized_gap <= rep.sandwich + 1e-9;
  rep.sandwich_within_bound = rep.sandwich <= rep.bound_total + 1e-9;
  return rep;
}

}  // namespace perfbound
