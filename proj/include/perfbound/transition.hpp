// transition.hpp - stateful transition maps Tr(d, theta) with shift
// accounting and empirical joint-sensitivity estimation.
#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "perfbound/core.hpp"
#include "perfbound/logistic.hpp"
#include "perfbound/numeric.hpp"
#include "perfbound/transport.hpp"

namespace perfbound {

// Which support points were altered by one application, tracked by
// index (values may coincide across points).
struct ShiftRecord {
  int m_changed = 0;
  std::vector<int> indices;
  std::vector<double> per_point_displacement;
};

enum class MapKind { top_xi_label_flip, bounded_feature_shift, composite };

enum class FlipTarget {
  zero,     // set the label to 0 ("treated" units stop being positives)
  fulfill,  // set the label to the model's predicted class
  negate,   // set the label against the model's predicted class
};

enum class ShiftMode {
  offset,             // add the shift vector to selected units' features
  contract_to_anchor  // move selected units' features toward an anchor
};

// Immutable map configuration; application is pure given the seed.
struct TransitionMap {
  MapKind kind = MapKind::top_xi_label_flip;

  // shared selection parameters
  double xi = 0.0;            // share of units selected by predicted risk
  double effectiveness = 1.0; // share of selected units actually treated
  std::uint64_t seed = 0;     // drives the deterministic thinning permutation
  bool add_bias = true;

  // top_xi_label_flip
  FlipTarget flip_target = FlipTarget::zero;

  // bounded_feature_shift
  ShiftMode shift_mode = ShiftMode::offset;
  std::vector<double> shift_vector;  // per-feature offsets
  std::vector<double> anchor;        // per-feature anchor for contraction
  double contract_rate = 0.0;        // in [0, 1]

  std::vector<TransitionMap> children;  // composite, applied in order

  // optional certificate from an exhaustive probe audit
  std::optional<double> certified_eps;

  static TransitionMap top_xi_flip(double xi, double effectiveness = 1.0,
                                   std::uint64_t seed = 0,
                                   FlipTarget target = FlipTarget::zero) {
    TransitionMap m;
    m.kind = MapKind::top_xi_label_flip;
    m.xi = xi;
    m.effectiveness = effectiveness;
    m.seed = seed;
    m.flip_target = target;
    return m;
  }

  static TransitionMap feature_shift(double xi, std::vector<double> shift,
                                     std::uint64_t seed = 0) {
    TransitionMap m;
    m.kind = MapKind::bounded_feature_shift;
    m.xi = xi;
    m.seed = seed;
    m.shift_mode = ShiftMode::offset;
    m.shift_vector = std::move(shift);
    return m;
  }

  static TransitionMap contraction(std::vector<double> anchor, double rate) {
    TransitionMap m;
    m.kind = MapKind::bounded_feature_shift;
    m.xi = 1.0;
    m.shift_mode = ShiftMode::contract_to_anchor;
    m.anchor = std::move(anchor);
    m.contract_rate = rate;
    return m;
  }

  static TransitionMap composite_of(std::vector<TransitionMap> maps) {
    TransitionMap m;
    m.kind = MapKind::composite;
    m.children = std::move(maps);
    return m;
  }

  void validate(const DomainBox& box) const {
    if (!(xi >= 0.0 && xi <= 1.0))
      throw std::invalid_argument("TransitionMap: xi must be in [0, 1]");
    if (!(effectiveness >= 0.0 && effectiveness <= 1.0))
      throw std::invalid_argument("TransitionMap: effectiveness must be in [0, 1]");
    if (kind == MapKind::bounded_feature_shift) {
      if (shift_mode == ShiftMode::offset) {
        if (static_cast<int>(shift_vector.size()) != box.dim_x)
          throw std::invalid_argument(
              "TransitionMap: shift vector length != feature count");
      } else {
        if (static_cast<int>(anchor.size()) != box.dim_x)
          throw std::invalid_argument("TransitionMap: anchor length != feature count");
        if (!(contract_rate >= 0.0 && contract_rate <= 1.0))
          throw std::invalid_argument("TransitionMap: contract rate must be in [0, 1]");
      }
    }
    if (kind == MapKind::composite)
      for (const auto& c : children) c.validate(box);
  }
};

// Indices of the ceil(xi * n) units with the highest predicted risk
// sigma(theta^T x~); ties broken by ascending original index.
inline std::vector<int> top_xi_selection(const EmpiricalDistribution& dist,
                                         const ParamVector& theta, double xi,
                                         bool add_bias = true) {
  if (!(xi >= 0.0 && xi <= 1.0))
    throw std::invalid_argument("top_xi_selection: xi must be in [0, 1]");
  const int n = dist.n();
  const int k = static_cast<int>(std::ceil(xi * n - 1e-12));
  if (k <= 0) return {};
  std::vector<std::pair<double, int>> scored(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    scored[static_cast<std::size_t>(i)] = {
        predict_probability(theta.v, dist.features(i), add_bias), i};
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  });
  std::vector<int> out(static_cast<std::size_t>(std::min(k, n)));
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = scored[i].second;
  return out;
}

namespace detail {

// deterministic thinning: keep floor(eff * k) of the selected indices,
// chosen by a seeded permutation so m is reproducible
inline std::vector<int> thin_selection(const std::vector<int>& selected,
                                       double effectiveness, std::uint64_t seed) {
  if (effectiveness >= 1.0) return selected;
  const int keep =
      static_cast<int>(std::floor(effectiveness * static_cast<double>(selected.size()) + 1e-12));
  if (keep <= 0) return {};
  Rng rng(seed);
  std::vector<int> perm = rng.permutation(static_cast<int>(selected.size()));
  std::vector<int> out(static_cast<std::size_t>(keep));
  for (int i = 0; i < keep; ++i) out[static_cast<std::size_t>(i)] = selected[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])];
  std::sort(out.begin(), out.end());
  return out;
}

inline void apply_one(const TransitionMap& map, const EmpiricalDistribution& dist,
                      const ParamVector& theta, std::vector<double>& flat) {
  const DomainBox& box = dist.box();
  const int dim = dist.dim();
  switch (map.kind) {
    case MapKind::top_xi_label_flip: {
      const std::vector<int> chosen = thin_selection(
          top_xi_selection(dist, theta, map.xi, map.add_bias), map.effectiveness,
          map.seed);
      for (const int i : chosen) {
        double& y = flat[static_cast<std::size_t>(i) * dim];
        switch (map.flip_target) {
          case FlipTarget::zero:
            y = 0.0;
            break;
          case FlipTarget::fulfill:
            y = predict_probability(theta.v, dist.features(i), map.add_bias) >= 0.5 ? 1.0 : 0.0;
            break;
          case FlipTarget::negate:
            y = predict_probability(theta.v, dist.features(i), map.add_bias) >= 0.5 ? 0.0 : 1.0;
            break;
        }
      }
      break;
    }
    case MapKind::bounded_feature_shift: {
      const std::vector<int> chosen = thin_selection(
          top_xi_selection(dist, theta, map.xi, map.add_bias), map.effectiveness,
          map.seed);
      for (const int i : chosen) {
        for (int f = 0; f < box.dim_x; ++f) {
          const int c = box.dim_y + f;
          double& v = flat[static_cast<std::size_t>(i) * dim + c];
          if (map.shift_mode == ShiftMode::offset)
            v += map.shift_vector[static_cast<std::size_t>(f)];
          else
            v += map.contract_rate * (map.anchor[static_cast<std::size_t>(f)] - v);
          v = std::clamp(v, box.lower[static_cast<std::size_t>(c)], box.upper[static_cast<std::size_t>(c)]);
        }
      }
      break;
    }
    case MapKind::composite: {
      // children see the intermediate state; rebuild a view distribution
      for (const auto& child : map.children) {
        EmpiricalDistribution current(box, flat, dist.weights());
        apply_one(child, current, theta, flat);
      }
      break;
    }
  }
}

}  // namespace detail

// Apply Tr(d, theta): points move or labels flip, weights never change.
// The ShiftRecord counts any index whose coordinates differ afterwards.
inline std::pair<EmpiricalDistribution, ShiftRecord> apply_transition(
    const TransitionMap& map, const EmpiricalDistribution& dist,
    const ParamVector& theta) {
  map.validate(dist.box());
  std::vector<double> flat = dist.flat();
  detail::apply_one(map, dist, theta, flat);

  ShiftRecord rec;
  const int dim = dist.dim();
  for (int i = 0; i < dist.n(); ++i) {
    double d2 = 0.0;
    bool changed = false;
    for (int c = 0; c < dim; ++c) {
      const double delta = flat[static_cast<std::size_t>(i) * dim + c] -
                           dist.flat()[static_cast<std::size_t>(i) * dim + c];
      if (delta != 0.0) changed = true;
      d2 += delta * delta;
    }
    if (changed) {
      rec.indices.push_back(i);
      rec.per_point_displacement.push_back(std::sqrt(d2));
    }
  }
  rec.m_changed = static_cast<int>(rec.indices.size());
  EmpiricalDistribution out(dist.box(), std::move(flat), dist.weights());
  return {std::move(out), std::move(rec)};
}

struct SensitivityProbe {
  EmpiricalDistribution d;
  ParamVector theta;
  EmpiricalDistribution d_prime;
  ParamVector theta_prime;
};

// Max over probes of W_p(Tr(d,th), Tr(d',th')) / (W_p(d,d') + ||th-th'||);
// a lower bound on any valid joint-sensitivity epsilon. Probes with zero
// denominator are skipped; all-zero denominators are an error.
inline double estimate_sensitivity(const TransitionMap& map,
                                   const std::vector<SensitivityProbe>& probes,
                                   double p, const WpOptions& opt = {}) {
  if (probes.empty()) throw std::invalid_argument("estimate_sensitivity: no probes");
  double eps_hat = 0.0;
  bool any = false;
  for (const auto& pr : probes) {
    const double denom = wp_exact(pr.d, pr.d_prime, p, opt).distance +
                         euclid(pr.theta.v, pr.theta_prime.v);
    if (denom <= 0.0) continue;
    any = true;
    const auto out_a = apply_transition(map, pr.d, pr.theta).first;
    const auto out_b = apply_transition(map, pr.d_prime, pr.theta_prime).first;
    const double num = wp_exact(out_a, out_b, p, opt).distance;
    eps_hat = std::max(eps_hat, num / denom);
  }
  if (!any)
    throw std::invalid_argument("estimate_sensitivity: all probe denominators are zero");
  return eps_hat;
}

}  // namespace perfbound
