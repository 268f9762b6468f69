// transport.hpp - exact p-Wasserstein distances between small empirical
// distributions. Equal-weight same-size inputs go through a
// Jonker-Volgenant assignment solver; the general case through a
// successive-shortest-path transportation solver with node potentials.
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "perfbound/core.hpp"
#include "perfbound/logistic.hpp"
#include "perfbound/numeric.hpp"

namespace perfbound {

struct CouplingCell {
  int src = 0;
  int dst = 0;
  double mass = 0.0;
  double cost = 0.0;  // transported pth-power cost of this cell: mass * d^p
};

struct CouplingPlan {
  std::vector<CouplingCell> cells;  // sorted by (src, dst)
  double total_cost_p = 0.0;        // sum of cell costs
  int n_src = 0;
  int n_dst = 0;

  std::vector<double> row_marginals() const {
    std::vector<double> m(static_cast<std::size_t>(n_src), 0.0);
    for (const auto& c : cells) m[static_cast<std::size_t>(c.src)] += c.mass;
    return m;
  }
  std::vector<double> col_marginals() const {
    std::vector<double> m(static_cast<std::size_t>(n_dst), 0.0);
    for (const auto& c : cells) m[static_cast<std::size_t>(c.dst)] += c.mass;
    return m;
  }

  std::string to_csv() const {
    std::ostringstream os;
    os << "src,dst,mass,cost\n";
    char buf[96];
    for (const auto& c : cells) {
      std::snprintf(buf, sizeof buf, "%d,%d,%.17g,%.17g\n", c.src, c.dst, c.mass, c.cost);
      os << buf;
    }
    return os.str();
  }
};

struct WpResult {
  double distance = 0.0;  // (min cost)^{1/p}
  double cost_p = 0.0;    // raw pth-power cost, exposed for the dual module
  CouplingPlan plan;
};

struct WpOptions {
  int assignment_cap = 2000;  // equal-weight, same-n
  int general_cap = 500;      // combined support otherwise
};

namespace detail {

// e-maxx formulation of the Jonker-Volgenant O(n^3) assignment solver;
// exact for real-valued costs.
inline std::vector<int> solve_assignment(const std::vector<double>& cost, int n) {
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(static_cast<std::size_t>(n) + 1, 0.0), v(static_cast<std::size_t>(n) + 1, 0.0);
  std::vector<int> p(static_cast<std::size_t>(n) + 1, 0), way(static_cast<std::size_t>(n) + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(static_cast<std::size_t>(n) + 1, inf);
    std::vector<char> used(static_cast<std::size_t>(n) + 1, 0);
    do {
      used[static_cast<std::size_t>(j0)] = 1;
      const int i0 = p[static_cast<std::size_t>(j0)];
      int j1 = 0;
      double delta = inf;
      for (int j = 1; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) continue;
        const double cur = cost[static_cast<std::size_t>(i0 - 1) * n + (j - 1)] -
                           u[static_cast<std::size_t>(i0)] - v[static_cast<std::size_t>(j)];
        if (cur < minv[static_cast<std::size_t>(j)]) {
          minv[static_cast<std::size_t>(j)] = cur;
          way[static_cast<std::size_t>(j)] = j0;
        }
        if (minv[static_cast<std::size_t>(j)] < delta) {
          delta = minv[static_cast<std::size_t>(j)];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) {
          u[static_cast<std::size_t>(p[static_cast<std::size_t>(j)])] += delta;
          v[static_cast<std::size_t>(j)] -= delta;
        } else {
          minv[static_cast<std::size_t>(j)] -= delta;
        }
      }
      j0 = j1;
    } while (p[static_cast<std::size_t>(j0)] != 0);
    do {
      const int j1 = way[static_cast<std::size_t>(j0)];
      p[static_cast<std::size_t>(j0)] = p[static_cast<std::size_t>(j1)];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> row_to_col(static_cast<std::size_t>(n), -1);
  for (int j = 1; j <= n; ++j)
    if (p[static_cast<std::size_t>(j)] != 0) row_to_col[static_cast<std::size_t>(p[static_cast<std::size_t>(j)] - 1)] = j - 1;
  return row_to_col;
}

// Successive shortest paths with Dijkstra over reduced costs. Supplies
// and demands are real masses; each augmentation saturates a source or
// a sink, so at most ns+nt rounds run.
inline void solve_transport(const std::vector<double>& cost, std::vector<double> supply,
                            std::vector<double> demand, int ns, int nt,
                            std::vector<double>& flow) {
  const double inf = std::numeric_limits<double>::infinity();
  const double mass_tol = 1e-15;
  flow.assign(static_cast<std::size_t>(ns) * nt, 0.0);
  std::vector<double> pot_s(static_cast<std::size_t>(ns), 0.0), pot_t(static_cast<std::size_t>(nt), 0.0);

  // seed potentials so all reduced costs start nonnegative
  for (int j = 0; j < nt; ++j) {
    double m = inf;
    for (int i = 0; i < ns; ++i) m = std::min(m, cost[static_cast<std::size_t>(i) * nt + j]);
    pot_t[static_cast<std::size_t>(j)] = m;
  }

  double remaining = 0.0;
  for (const double s : supply) remaining += s;

  const int max_rounds = ns * nt + 4 * (ns + nt) + 16;
  int rounds = 0;
  while (remaining > mass_tol) {
    if (++rounds > max_rounds)
      throw std::runtime_error("solve_transport: augmentation limit exceeded");
    // Dijkstra from all sources with remaining supply
    std::vector<double> dist_s(static_cast<std::size_t>(ns), inf), dist_t(static_cast<std::size_t>(nt), inf);
    std::vector<int> par_t(static_cast<std::size_t>(nt), -1);   // source feeding t in the path tree
    std::vector<int> par_s(static_cast<std::size_t>(ns), -1);   // sink feeding s (via residual arc)
    std::vector<char> done_s(static_cast<std::size_t>(ns), 0), done_t(static_cast<std::size_t>(nt), 0);
    for (int i = 0; i < ns; ++i)
      if (supply[static_cast<std::size_t>(i)] > mass_tol) dist_s[static_cast<std::size_t>(i)] = 0.0;

    int reachable_sink = -1;
    while (true) {
      // pick the unfinished node with the smallest tentative distance
      double best = inf;
      int bi = -1;
      bool is_src = true;
      for (int i = 0; i < ns; ++i)
        if (!done_s[static_cast<std::size_t>(i)] && dist_s[static_cast<std::size_t>(i)] < best) {
          best = dist_s[static_cast<std::size_t>(i)];
          bi = i;
          is_src = true;
        }
      for (int j = 0; j < nt; ++j)
        if (!done_t[static_cast<std::size_t>(j)] && dist_t[static_cast<std::size_t>(j)] < best) {
          best = dist_t[static_cast<std::size_t>(j)];
          bi = j;
          is_src = false;
        }
      if (bi < 0) break;
      if (is_src) {
        done_s[static_cast<std::size_t>(bi)] = 1;
        for (int j = 0; j < nt; ++j) {
          if (done_t[static_cast<std::size_t>(j)]) continue;
          double rc = cost[static_cast<std::size_t>(bi) * nt + j] - pot_s[static_cast<std::size_t>(bi)] -
                      pot_t[static_cast<std::size_t>(j)];
          rc = std::max(rc, 0.0);  // clamp fp round-off
          if (best + rc < dist_t[static_cast<std::size_t>(j)]) {
            dist_t[static_cast<std::size_t>(j)] = best + rc;
            par_t[static_cast<std::size_t>(j)] = bi;
          }
        }
      } else {
        done_t[static_cast<std::size_t>(bi)] = 1;
        for (int i = 0; i < ns; ++i) {
          if (done_s[static_cast<std::size_t>(i)] || flow[static_cast<std::size_t>(i) * nt + bi] <= mass_tol)
            continue;
          double rc = pot_s[static_cast<std::size_t>(i)] + pot_t[static_cast<std::size_t>(bi)] -
                      cost[static_cast<std::size_t>(i) * nt + bi];
          rc = std::max(rc, 0.0);
          if (best + rc < dist_s[static_cast<std::size_t>(i)]) {
            dist_s[static_cast<std::size_t>(i)] = best + rc;
            par_s[static_cast<std::size_t>(i)] = bi;
          }
        }
      }
    }

    // cheapest sink with unmet demand
    double best_total = inf;
    for (int j = 0; j < nt; ++j)
      if (demand[static_cast<std::size_t>(j)] > mass_tol && dist_t[static_cast<std::size_t>(j)] < best_total) {
        best_total = dist_t[static_cast<std::size_t>(j)];
        reachable_sink = j;
      }
    if (reachable_sink < 0)
      throw std::runtime_error("solve_transport: no augmenting path (unbalanced input?)");

    // bottleneck along the alternating path
    double push = demand[static_cast<std::size_t>(reachable_sink)];
    {
      int t = reachable_sink;
      while (true) {
        const int s = par_t[static_cast<std::size_t>(t)];
        const int t_prev = par_s[static_cast<std::size_t>(s)];
        if (t_prev < 0) {
          push = std::min(push, supply[static_cast<std::size_t>(s)]);
          break;
        }
        push = std::min(push, flow[static_cast<std::size_t>(s) * nt + t_prev]);
        t = t_prev;
      }
    }
    // apply
    {
      int t = reachable_sink;
      while (true) {
        const int s = par_t[static_cast<std::size_t>(t)];
        flow[static_cast<std::size_t>(s) * nt + t] += push;
        const int t_prev = par_s[static_cast<std::size_t>(s)];
        if (t_prev < 0) {
          supply[static_cast<std::size_t>(s)] -= push;
          break;
        }
        flow[static_cast<std::size_t>(s) * nt + t_prev] -= push;
        t = t_prev;
      }
      demand[static_cast<std::size_t>(reachable_sink)] -= push;
      remaining -= push;
    }
    // Johnson potential update, distances capped at the target's to keep
    // reduced costs nonnegative for later rounds
    for (int i = 0; i < ns; ++i)
      pot_s[static_cast<std::size_t>(i)] -= std::min(dist_s[static_cast<std::size_t>(i)], best_total);
    for (int j = 0; j < nt; ++j)
      pot_t[static_cast<std::size_t>(j)] += std::min(dist_t[static_cast<std::size_t>(j)], best_total);
  }
}

}  // namespace detail

// Exact W_p between two distributions on the same box, with the optimal
// plan. Cost is ||z - z'||_2^p; the returned distance is the 1/p root.
inline WpResult wp_exact(const EmpiricalDistribution& a, const EmpiricalDistribution& b,
                         double p, const WpOptions& opt = {}) {
  if (a.dim() != b.dim())
    throw std::invalid_argument("wp_exact: dimension mismatch");
  if (!(p >= 1.0 && p <= 2.0))
    throw std::invalid_argument("wp_exact: p must be in [1, 2]");

  const bool assignment_case =
      a.n() == b.n() && a.uniform_weights() && b.uniform_weights();
  if (assignment_case) {
    if (a.n() > opt.assignment_cap)
      throw std::invalid_argument(
          "wp_exact: support " + std::to_string(a.n()) + " exceeds the assignment cap " +
          std::to_string(opt.assignment_cap) + "; subsample the inputs");
  } else if (a.n() + b.n() > opt.general_cap) {
    throw std::invalid_argument(
        "wp_exact: combined support " + std::to_string(a.n() + b.n()) +
        " exceeds the cap " + std::to_string(opt.general_cap) + "; subsample the inputs");
  }

  const int ns = a.n(), nt = b.n();
  std::vector<double> cost(static_cast<std::size_t>(ns) * nt);
  for (int i = 0; i < ns; ++i)
    for (int j = 0; j < nt; ++j) {
      const double d2 = sq_dist(a.point(i), b.point(j));
      cost[static_cast<std::size_t>(i) * nt + j] =
          p == 2.0 ? d2 : (p == 1.0 ? std::sqrt(d2) : std::pow(d2, 0.5 * p));
    }

  WpResult out;
  out.plan.n_src = ns;
  out.plan.n_dst = nt;

  if (assignment_case) {
    const std::vector<int> match = detail::solve_assignment(cost, ns);
    const double w = 1.0 / ns;
    out.plan.cells.reserve(static_cast<std::size_t>(ns));
    for (int i = 0; i < ns; ++i) {
      const int j = match[static_cast<std::size_t>(i)];
      const double c = w * cost[static_cast<std::size_t>(i) * nt + j];
      out.plan.cells.push_back({i, j, w, c});
      out.cost_p += c;
    }
  } else {
    std::vector<double> flow;
    detail::solve_transport(cost, a.weights(), b.weights(), ns, nt, flow);
    for (int i = 0; i < ns; ++i)
      for (int j = 0; j < nt; ++j) {
        const double m = flow[static_cast<std::size_t>(i) * nt + j];
        if (m > 0.0) {
          const double c = m * cost[static_cast<std::size_t>(i) * nt + j];
          out.plan.cells.push_back({i, j, m, c});
          out.cost_p += c;
        }
      }
  }
  std::sort(out.plan.cells.begin(), out.plan.cells.end(),
            [](const CouplingCell& l, const CouplingCell& r) {
              return l.src != r.src ? l.src < r.src : l.dst < r.dst;
            });
  out.plan.total_cost_p = out.cost_p;
  out.distance = out.cost_p <= 0.0 ? 0.0 : std::pow(out.cost_p, 1.0 / p);
  return out;
}

// W_p(Tr(theta, d), d) <= (m/n)^{1/p} D_Z when at most m of n support
// points move, each by at most the domain diameter.
inline double shift_diameter_bound(int m, int n, double p, double D_Z) {
  if (n < 1) throw std::invalid_argument("shift_diameter_bound: n < 1");
  if (m < 0 || m > n)
    throw std::invalid_argument("shift_diameter_bound: need 0 <= m <= n");
  if (!(p >= 1.0 && p <= 2.0))
    throw std::invalid_argument("shift_diameter_bound: p must be in [1, 2]");
  if (m == 0) return 0.0;
  return std::pow(static_cast<double>(m) / n, 1.0 / p) * D_Z;
}

struct KrGapResult {
  double risk_gap = 0.0;          // R(d, theta) - R(d', theta), unregularized
  double lipschitz_bound = 0.0;   // L_ell * W_1(d, d')
  bool ok = false;
};

// Kantorovich-Rubinstein check: |E_d l - E_d' l| <= L_ell W_1 for a loss
// that is L_ell-Lipschitz in z. The caller supplies the certificate via
// profile.L_ell; the regularizer cancels in the gap and is omitted.
inline KrGapResult kr_gap_check(const EmpiricalDistribution& d,
                                const EmpiricalDistribution& d_prime,
                                const ParamVector& theta,
                                const ConstantsProfile& profile,
                                bool add_bias = true, const WpOptions& opt = {}) {
  KrGapResult r;
  r.risk_gap = empirical_risk(d, theta.v, 0.0, add_bias) -
               empirical_risk(d_prime, theta.v, 0.0, add_bias);
  const double w1 = wp_exact(d, d_prime, 1.0, opt).distance;
  r.lipschitz_bound = profile.L_ell * w1;
  r.ok = std::abs(r.risk_gap) <= r.lipschitz_bound + 1e-9;
  return r;
}

}  // namespace perfbound
