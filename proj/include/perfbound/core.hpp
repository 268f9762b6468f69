// core.hpp - domain containers: the bounded data box, finite weighted
// point sets standing in for samples and populations, the compact
// parameter space, and the audited record of all bound constants.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "perfbound/numeric.hpp"

namespace perfbound {

inline constexpr double kBoxClampTol = 1e-9;
inline constexpr double kWeightTol = 1e-12;

// Bounded data domain Z = Y x X; the first dim_y coordinates are labels.
struct DomainBox {
  std::vector<double> lower;
  std::vector<double> upper;
  int dim_y = 1;
  int dim_x = 0;

  int dim() const { return dim_y + dim_x; }

  static DomainBox unit(int dim_y, int dim_x) {
    DomainBox b;
    b.dim_y = dim_y;
    b.dim_x = dim_x;
    b.lower.assign(static_cast<std::size_t>(dim_y) + dim_x, 0.0);
    b.upper.assign(static_cast<std::size_t>(dim_y) + dim_x, 1.0);
    return b;
  }

  void validate() const {
    if (lower.size() != upper.size())
      throw std::invalid_argument("DomainBox: lower/upper size mismatch");
    if (static_cast<int>(lower.size()) != dim())
      throw std::invalid_argument("DomainBox: dim_y + dim_x != coordinate count");
    for (std::size_t i = 0; i < lower.size(); ++i)
      if (!(lower[i] <= upper[i]))
        throw std::invalid_argument("DomainBox: lower[" + std::to_string(i) +
                                    "] > upper[" + std::to_string(i) + "]");
  }
};

// sup_{z,z'} ||z - z'||_2 = ||upper - lower||_2
inline double domain_diameter(const DomainBox& box) {
  box.validate();
  double s = 0.0;
  for (std::size_t i = 0; i < box.lower.size(); ++i) {
    const double d = box.upper[i] - box.lower[i];
    s += d * d;
  }
  const double diam = std::sqrt(s);
  if (!(diam > 0.0))
    throw std::invalid_argument("domain_diameter: degenerate box (zero diameter)");
  return diam;
}

// Finite weighted point set on a DomainBox. Immutable after
// construction; weights sum to 1 within 1e-12 and every point lies in
// the box (round-off up to 1e-9 outside is clamped, more is rejected).
class EmpiricalDistribution {
 public:
  EmpiricalDistribution(DomainBox box, std::vector<double> flat_points,
                        std::vector<double> weights = {})
      : box_(std::move(box)) {
    box_.validate();
    dim_ = box_.dim();
    if (flat_points.empty() || flat_points.size() % static_cast<std::size_t>(dim_) != 0)
      throw std::invalid_argument("EmpiricalDistribution: empty or ragged point data");
    n_ = static_cast<int>(flat_points.size() / static_cast<std::size_t>(dim_));
    data_ = std::move(flat_points);
    clamp_or_reject();
    if (weights.empty()) {
      weights_.assign(static_cast<std::size_t>(n_), 1.0 / n_);
    } else {
      if (static_cast<int>(weights.size()) != n_)
        throw std::invalid_argument("EmpiricalDistribution: weight count != point count");
      double total = 0.0;
      for (std::size_t i = 0; i < weights.size(); ++i) {
        if (weights[i] < 0.0)
          throw std::invalid_argument("EmpiricalDistribution: negative weight at index " +
                                      std::to_string(i));
        total += weights[i];
      }
      if (!(total > 0.0))
        throw std::invalid_argument("EmpiricalDistribution: weights sum to zero");
      // already normalized input is kept bit-for-bit (serialization round trips)
      if (std::abs(total - 1.0) <= kWeightTol) {
        weights_ = std::move(weights);
      } else {
        weights_.resize(weights.size());
        for (std::size_t i = 0; i < weights.size(); ++i) weights_[i] = weights[i] / total;
      }
    }
  }

  int n() const { return n_; }
  int dim() const { return dim_; }
  const DomainBox& box() const { return box_; }
  const std::vector<double>& weights() const { return weights_; }
  const std::vector<double>& flat() const { return data_; }

  std::span<const double> point(int i) const {
    return {data_.data() + static_cast<std::size_t>(i) * dim_, static_cast<std::size_t>(dim_)};
  }
  double weight(int i) const { return weights_[static_cast<std::size_t>(i)]; }

  // label convention used throughout: dim_y == 1, coordinate 0
  double label(int i) const { return data_[static_cast<std::size_t>(i) * dim_]; }

  std::span<const double> features(int i) const {
    return {data_.data() + static_cast<std::size_t>(i) * dim_ + box_.dim_y,
            static_cast<std::size_t>(box_.dim_x)};
  }

  bool uniform_weights() const {
    const double u = 1.0 / n_;
    for (const double w : weights_)
      if (std::abs(w - u) > kWeightTol) return false;
    return true;
  }

 private:
  void clamp_or_reject() {
    for (int i = 0; i < n_; ++i) {
      for (int c = 0; c < dim_; ++c) {
        double& v = data_[static_cast<std::size_t>(i) * dim_ + c];
        const double lo = box_.lower[static_cast<std::size_t>(c)];
        const double hi = box_.upper[static_cast<std::size_t>(c)];
        if (v < lo - kBoxClampTol || v > hi + kBoxClampTol) {
          std::ostringstream os;
          os << "EmpiricalDistribution: point " << i << " outside box at coordinate "
             << c << " (value " << v << ", box [" << lo << ", " << hi << "])";
          throw std::invalid_argument(os.str());
        }
        v = std::clamp(v, lo, hi);
      }
    }
  }

  DomainBox box_;
  std::vector<double> data_;
  std::vector<double> weights_;
  int n_ = 0;
  int dim_ = 0;
};

// spec'd constructor name; points given row-wise
inline EmpiricalDistribution empirical_from_points(
    const DomainBox& box, const std::vector<std::vector<double>>& points,
    std::vector<double> weights = {}) {
  if (points.empty())
    throw std::invalid_argument("empirical_from_points: empty point list");
  std::vector<double> flat;
  flat.reserve(points.size() * points.front().size());
  for (const auto& p : points) {
    if (static_cast<int>(p.size()) != box.dim())
      throw std::invalid_argument("empirical_from_points: point dimension != box dimension");
    flat.insert(flat.end(), p.begin(), p.end());
  }
  return EmpiricalDistribution(box, std::move(flat), std::move(weights));
}

// Compact parameter space: Euclidean ball or axis-aligned box.
class ParamSpace {
 public:
  static ParamSpace ball(int dim, double radius) {
    if (!(radius > 0.0) || !std::isfinite(radius))
      throw std::invalid_argument("ParamSpace::ball: radius must be finite positive");
    ParamSpace s;
    s.dim_ = dim;
    s.radius_ = radius;
    return s;
  }

  static ParamSpace box(std::vector<double> lower, std::vector<double> upper) {
    ParamSpace s;
    s.dim_ = static_cast<int>(lower.size());
    s.lower_ = std::move(lower);
    s.upper_ = std::move(upper);
    if (s.lower_.size() != s.upper_.size())
      throw std::invalid_argument("ParamSpace::box: bound size mismatch");
    for (std::size_t i = 0; i < s.lower_.size(); ++i)
      if (!(s.lower_[i] <= s.upper_[i]) || !std::isfinite(s.lower_[i]) ||
          !std::isfinite(s.upper_[i]))
        throw std::invalid_argument("ParamSpace::box: invalid bounds");
    return s;
  }

  int dim() const { return dim_; }
  bool is_ball() const { return lower_.empty(); }
  double radius() const { return radius_; }

  double diameter() const {
    if (is_ball()) return 2.0 * radius_;
    double s = 0.0;
    for (std::size_t i = 0; i < lower_.size(); ++i) {
      const double d = upper_[i] - lower_[i];
      s += d * d;
    }
    return std::sqrt(s);
  }

  void project(std::vector<double>& theta) const {
    if (static_cast<int>(theta.size()) != dim_)
      throw std::invalid_argument("ParamSpace::project: dimension mismatch");
    if (is_ball()) {
      const double nrm = norm2(theta);
      if (nrm > radius_) {
        const double scale = radius_ / nrm;
        for (double& t : theta) t *= scale;
      }
    } else {
      for (std::size_t i = 0; i < theta.size(); ++i)
        theta[i] = std::clamp(theta[i], lower_[i], upper_[i]);
    }
  }

 private:
  int dim_ = 0;
  double radius_ = 0.0;
  std::vector<double> lower_, upper_;
};

// Every constant the bound formulas consume, in one audited record.
// C_a = C_b = 1 follows the case study; they are exposed because the
// concentration lemma defines them as dimension-dependent.
struct ConstantsProfile {
  double L_ell = 1.0;        // loss Lipschitz constant
  double L_a = 1.0;          // argmin-map Lipschitz constant
  double L_a_tilde = 0.5;    // 1/(1+L_a)
  double L_f = 0.25;         // model Lipschitz constant
  double gamma = 1.0;        // strong convexity
  double kappa = 1.0;        // gradient smoothness (implementer-supplied)
  double eps_sens = 0.1;     // joint sensitivity epsilon
  double p = 2.0;            // Wasserstein order, in [1,2]
  double nu = 4.0;           // data dimension
  double C_a = 1.0;
  double C_b = 1.0;
  double D_Z = 1.0;          // data-domain diameter
  double D_Theta = 2.0;      // parameter-space diameter
  double F = 1.0;            // uniform model bound
  double B = 1e-3;           // weaker-regularity constant
  double delta = 0.05;       // confidence parameter

  // optional overrides; negative means unset
  double L_ell_sampling = -1.0;    // separate Lipschitz constant for the sampling term
  double complexity_inf = -1.0;    // injected entropy-integral value (uniform norm)
  double complexity_l2 = -1.0;     // injected entropy-integral value (L2 norm)

  double sampling_L_ell() const { return L_ell_sampling > 0 ? L_ell_sampling : L_ell; }

  ConstantsProfile& derive_la_tilde() {
    L_a_tilde = 1.0 / (1.0 + L_a);
    return *this;
  }

  void validate() const {
    auto pos = [](double v, const char* name) {
      if (!(v > 0.0) || !std::isfinite(v))
        throw std::invalid_argument(std::string("ConstantsProfile: ") + name +
                                    " must be positive and finite");
    };
    pos(L_ell, "L_ell");
    if (L_a < 0.0) throw std::invalid_argument("ConstantsProfile: L_a must be >= 0");
    pos(L_a_tilde, "L_a_tilde");
    if (L_f < 0.0) throw std::invalid_argument("ConstantsProfile: L_f must be >= 0");
    pos(gamma, "gamma");
    pos(kappa, "kappa");
    if (eps_sens < 0.0)
      throw std::invalid_argument("ConstantsProfile: eps_sens must be >= 0");
    if (!(p >= 1.0 && p <= 2.0))
      throw std::invalid_argument("ConstantsProfile: p must be in [1, 2]");
    pos(nu, "nu");
    pos(C_a, "C_a");
    pos(C_b, "C_b");
    pos(D_Z, "D_Z");
    pos(D_Theta, "D_Theta");
    pos(F, "F");
    if (B < 0.0) throw std::invalid_argument("ConstantsProfile: B must be >= 0");
    if (!(delta > 0.0 && delta < 1.0))
      throw std::invalid_argument("ConstantsProfile: delta must be in (0, 1)");
    if (std::abs(L_a_tilde * (1.0 + L_a) - 1.0) > kWeightTol)
      throw std::invalid_argument(
          "ConstantsProfile: L_a_tilde * (1 + L_a) != 1 (within 1e-12)");
  }
};

// Pure warnings-only sanity pass over a profile. Flags the regimes in
// which the concentration and growth arguments degrade.
inline std::vector<std::string> constants_audit(const ConstantsProfile& c) {
  std::vector<std::string> warnings;
  if (c.nu <= 2.0 * c.p) {
    std::ostringstream os;
    os << "nu <= 2p (nu=" << c.nu << ", p=" << c.p
       << "): outside the concentration lemma's nu > 2p regime";
    warnings.push_back(os.str());
  }
  const double ratio = c.eps_sens * c.kappa / c.gamma;
  if (ratio >= 1.0) {
    std::ostringstream os;
    os << "eps*kappa/gamma = " << ratio
       << " >= 1: geometric growth regime, bounds grow with the round count";
    warnings.push_back(os.str());
  }
  if (!(c.delta > 0.0) || c.delta > 0.5) {
    std::ostringstream os;
    os << "delta = " << c.delta << " outside (0, 0.5]";
    warnings.push_back(os.str());
  }
  return warnings;
}

}  // namespace perfbound
