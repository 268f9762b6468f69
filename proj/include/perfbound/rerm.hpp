// rerm.hpp - the repeated (empirical) risk minimization loop and its
// audited trace.
#pragma once

#include <algorithm>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <vector>

#include "perfbound/core.hpp"
#include "perfbound/logistic.hpp"
#include "perfbound/transition.hpp"
#include "perfbound/transport.hpp"

namespace perfbound {

// {theta_t, d_t, m_t} for t = 1..T, plus the derived m_max and M_T.
struct RermTrace {
  std::vector<ParamVector> thetas;              // theta_1 .. theta_T
  std::vector<EmpiricalDistribution> dists;     // d_0 .. d_T
  std::vector<int> shift_counts;                // m_1 .. m_T
  std::vector<double> wasserstein_steps;        // W_p(d_{t-1}, d_t), empty if disabled

  int T() const { return static_cast<int>(thetas.size()); }
  int m_max() const {
    return shift_counts.empty() ? 0 : *std::max_element(shift_counts.begin(), shift_counts.end());
  }
  long long M_T() const {
    return std::accumulate(shift_counts.begin(), shift_counts.end(), 0LL);
  }
};

struct RermOptions {
  bool record_wasserstein = true;  // exact per-step W_p where support allows
  double wasserstein_p = 2.0;
  WpOptions wp_options;
  bool warm_start = true;
};

struct RermError : std::runtime_error {
  int round;
  RermError(const std::string& msg, int r) : std::runtime_error(msg), round(r) {}
};

// Repeated ERM: theta_t = G(d_{t-1}), d_t = Tr(theta_t, d_{t-1}); exactly
// T fits and T transitions, deterministic given the inputs.
inline RermTrace run_rerm(const EmpiricalDistribution& dist0, const TransitionMap& map,
                          int T, const ParamSpace& space, const FitConfig& fit_cfg,
                          const RermOptions& opt = {}) {
  if (T < 1) throw std::invalid_argument("run_rerm: T must be >= 1");
  RermTrace trace;
  trace.dists.push_back(dist0);
  const ParamVector* warm = nullptr;
  for (int t = 1; t <= T; ++t) {
    FitResult fit;
    try {
      fit = erm_fit(trace.dists.back(), space, fit_cfg, opt.warm_start ? warm : nullptr);
    } catch (const FitError& e) {
      throw RermError("run_rerm: fit failed in round " + std::to_string(t) + ": " +
                          e.what(),
                      t);
    }
    trace.thetas.push_back(fit.theta);
    warm = &trace.thetas.back();

    auto [next, rec] = apply_transition(map, trace.dists.back(), trace.thetas.back());
    trace.shift_counts.push_back(rec.m_changed);
    const bool can_record =
        opt.record_wasserstein &&
        (trace.dists.back().n() <= opt.wp_options.assignment_cap);
    if (can_record) {
      trace.wasserstein_steps.push_back(
          wp_exact(trace.dists.back(), next, opt.wasserstein_p, opt.wp_options).distance);
    }
    trace.dists.push_back(std::move(next));
  }
  return trace;
}

// Population-side loop for the cumulative bound: the first transition is
// driven by the deployed (sample-trained) model, subsequent rounds refit
// on the shifted population.
inline RermTrace run_rrm(const EmpiricalDistribution& population,
                         const TransitionMap& map, const ParamVector& theta_start,
                         int rounds, const ParamSpace& space, const FitConfig& fit_cfg,
                         const RermOptions& opt = {}) {
  if (rounds < 1) throw std::invalid_argument("run_rrm: rounds must be >= 1");
  RermTrace trace;
  trace.dists.push_back(population);
  for (int t = 1; t <= rounds; ++t) {
    ParamVector theta_t;
    if (t == 1) {
      theta_t = theta_start;
    } else {
      try {
        const FitResult fit = erm_fit(trace.dists.back(), space, fit_cfg,
                                      opt.warm_start ? &trace.thetas.back() : nullptr);
        theta_t = fit.theta;
      } catch (const FitError& e) {
        throw RermError("run_rrm: fit failed in round " + std::to_string(t) + ": " +
                            e.what(),
                        t);
      }
    }
    trace.thetas.push_back(std::move(theta_t));
    auto [next, rec] = apply_transition(map, trace.dists.back(), trace.thetas.back());
    trace.shift_counts.push_back(rec.m_changed);
    const bool can_record =
        opt.record_wasserstein &&
        (trace.dists.back().n() <= opt.wp_options.assignment_cap);
    if (can_record) {
      trace.wasserstein_steps.push_back(
          wp_exact(trace.dists.back(), next, opt.wasserstein_p, opt.wp_options).distance);
    }
    trace.dists.push_back(std::move(next));
  }
  return trace;
}

}  // namespace perfbound
