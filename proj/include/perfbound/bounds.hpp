// bounds.hpp - every closed-form generalization bound, each returned as
// a term-decomposed report. Formulas take explicit (m, n, T); trace
// wrappers extract m_max / M_T from a RermTrace.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "perfbound/core.hpp"
#include "perfbound/numeric.hpp"
#include "perfbound/rerm.hpp"

namespace perfbound {

// Named-term decomposition of a bound; total == sum of terms by
// construction (asserted to 1e-12 relative in tests).
struct BoundReport {
  std::string name;
  std::vector<std::pair<std::string, double>> terms;
  double total = 0.0;
  double confidence = 0.0;  // the 1 - delta/c level the statement holds at
  std::uint64_t inputs_hash = 0;

  double term(const std::string& key) const {
    for (const auto& [k, v] : terms)
      if (k == key) return v;
    throw std::invalid_argument("BoundReport: no term named '" + key + "'");
  }

  void finalize() {
    KahanSum s;
    for (const auto& [k, v] : terms) {
      if (v < 0.0)
        throw std::logic_error("BoundReport: negative term '" + k + "'");
      s.add(v);
    }
    total = s.value();
  }

  std::string csv_header() const {
    std::string h = "name";
    for (const auto& [k, v] : terms) h += "," + k;
    h += ",total,confidence";
    return h;
  }
  std::string csv_row() const {
    std::ostringstream os;
    os << name;
    char buf[40];
    for (const auto& [k, v] : terms) {
      std::snprintf(buf, sizeof buf, ",%.17g", v);
      os << buf;
    }
    std::snprintf(buf, sizeof buf, ",%.17g", total);
    os << buf;
    std::snprintf(buf, sizeof buf, ",%.17g", confidence);
    os << buf;
    return os.str();
  }
};

namespace detail {

inline std::uint64_t profile_hash(const ConstantsProfile& c) {
  std::ostringstream os;
  os.precision(17);
  os << c.L_ell << '|' << c.L_a << '|' << c.L_a_tilde << '|' << c.L_f << '|' << c.gamma
     << '|' << c.kappa << '|' << c.eps_sens << '|' << c.p << '|' << c.nu << '|' << c.C_a
     << '|' << c.C_b << '|' << c.D_Z << '|' << c.D_Theta << '|' << c.F << '|' << c.B
     << '|' << c.delta << '|' << c.L_ell_sampling << '|' << c.complexity_inf << '|'
     << c.complexity_l2;
  return fnv1a(os.str());
}

inline void check_mn(long long m, long long n) {
  if (n < 1) throw std::invalid_argument("bound: n must be >= 1");
  if (m < 0 || m > n) throw std::invalid_argument("bound: need 0 <= m <= n");
}

}  // namespace detail

// Concentration term (log(C_a/delta) / (C_b n))^{p/nu}.
inline double fournier_term(long long n, double delta, double p, double nu, double C_a,
                            double C_b) {
  if (n < 1) throw std::invalid_argument("fournier_term: n must be >= 1");
  if (!(delta > 0.0 && delta < 1.0))
    throw std::invalid_argument("fournier_term: delta must be in (0, 1)");
  const double ratio = C_a / delta;
  if (ratio <= 1.0)
    throw std::invalid_argument("fournier_term: C_a/delta <= 1 gives a nonpositive log");
  return std::pow(std::log(ratio) / (C_b * static_cast<double>(n)), p / nu);
}

// Lemma-style in-sample shift bound:
// (eps^T - 1)/(eps - 1) * (m/n)^{1/p} * D_Z * L_a~, limit T at eps = 1.
inline double in_sample_shift_bound(double eps, int T, long long m, long long n,
                                    double p, double D_Z, double L_a_tilde) {
  detail::check_mn(m, n);
  if (T < 1) throw std::invalid_argument("in_sample_shift_bound: T must be >= 1");
  if (eps < 0.0) throw std::invalid_argument("in_sample_shift_bound: eps must be >= 0");
  if (m == 0) return 0.0;
  return geometric_factor(eps, T) *
         std::pow(static_cast<double>(m) / static_cast<double>(n), 1.0 / p) * D_Z *
         L_a_tilde;
}

// One-sided Wald upper limit for the population response rate, clamped
// to [0, 1]; the paper uses the plain Wald interval without correction.
inline double wald_upper(long long m, long long n, double delta) {
  detail::check_mn(m, n);
  const double phat = static_cast<double>(m) / static_cast<double>(n);
  const double half = normal_quantile(delta) *
                      std::sqrt(phat * (1.0 - phat) / static_cast<double>(n));
  return std::clamp(phat + half, 0.0, 1.0);
}

// Fraction-valued variant for sweep grids where xi*n is not integral.
inline double wald_upper_frac(double share, long long n, double delta) {
  if (n < 1) throw std::invalid_argument("wald_upper_frac: n must be >= 1");
  if (!(share >= 0.0 && share <= 1.0))
    throw std::invalid_argument("wald_upper_frac: share must be in [0, 1]");
  const double half = normal_quantile(delta) *
                      std::sqrt(share * (1.0 - share) / static_cast<double>(n));
  return std::clamp(share + half, 0.0, 1.0);
}

// Pooled Wald limit over T rounds with effective size Tn.
inline double pooled_wald_upper(const std::vector<long long>& m_list, long long n,
                                double delta) {
  if (m_list.empty()) throw std::invalid_argument("pooled_wald_upper: empty list");
  long long M = 0;
  for (const long long m : m_list) {
    detail::check_mn(m, n);
    M += m;
  }
  const double Tn = static_cast<double>(m_list.size()) * static_cast<double>(n);
  const double phat = static_cast<double>(M) / Tn;
  const double half = normal_quantile(delta) * std::sqrt(phat * (1.0 - phat) / Tn);
  return std::clamp(phat + half, 0.0, 1.0);
}

// ------------------------------------------------------------- reports

// Excess risk of a model trained on performative samples (sample-only
// performativity). Terms: sampling, performative (geometric factor in
// eps*kappa/gamma), rademacher. Holds at 1 - delta/2.
inline BoundReport excess_risk_bound(const ConstantsProfile& c, int T, long long m,
                                     long long n, double complexity_L2) {
  c.validate();
  detail::check_mn(m, n);
  if (T < 1) throw std::invalid_argument("excess_risk_bound: T must be >= 1");
  if (complexity_L2 < 0.0)
    throw std::invalid_argument("excess_risk_bound: complexity_L2 must be >= 0");
  const double ratio = c.eps_sens * c.kappa / c.gamma;
  BoundReport r;
  r.name = "rq1-excess";
  r.terms.emplace_back("sampling",
                       c.L_ell * fournier_term(n, c.delta, c.p, c.nu, c.C_a, c.C_b));
  r.terms.emplace_back(
      "performative",
      c.L_ell * c.L_a * geometric_factor(ratio, T) *
          std::pow(static_cast<double>(m) / static_cast<double>(n), 1.0 / c.p) * c.D_Z);
  r.terms.emplace_back("rademacher",
                       c.F * c.L_ell / std::sqrt(static_cast<double>(n)) *
                           (24.0 * complexity_L2 + 2.0 * std::sqrt(2.0 * std::log(1.0 / c.delta))));
  r.confidence = 1.0 - c.delta / 2.0;
  r.inputs_hash = detail::profile_hash(c);
  r.finalize();
  return r;
}

// Data-dependent generalization gap (corollary form): sampling term may
// use a separate effective L_ell; the geometric factor runs to T-1 and
// keeps the L_a~ damping. Holds at 1 - delta/2.
inline BoundReport gen_gap_bound_rq1(const ConstantsProfile& c, int T, long long m,
                                     long long n) {
  c.validate();
  detail::check_mn(m, n);
  if (T < 1) throw std::invalid_argument("gen_gap_bound_rq1: T must be >= 1");
  BoundReport r;
  r.name = "rq1-corollary";
  r.terms.emplace_back(
      "sampling", c.sampling_L_ell() * fournier_term(n, c.delta, c.p, c.nu, c.C_a, c.C_b));
  r.terms.emplace_back(
      "performative",
      c.L_ell * geometric_factor(c.eps_sens, T - 1) *
          std::pow(static_cast<double>(m) / static_cast<double>(n), 1.0 / c.p) * c.D_Z *
          c.L_a_tilde);
  r.confidence = 1.0 - c.delta / 2.0;
  r.inputs_hash = detail::profile_hash(c);
  r.finalize();
  return r;
}

// A(m,n) = 2 D_Z (m/n + q(delta) sqrt(m(n-m))/n^{3/2})^{1/p}
inline double population_radius_A(const ConstantsProfile& c, long long m, long long n) {
  detail::check_mn(m, n);
  return 2.0 * c.D_Z * std::pow(wald_upper(m, n, c.delta), 1.0 / c.p);
}

// K(T,m,n) = geo(eps kappa/gamma, T) (m/n)^{1/p}
inline double sample_growth_K(const ConstantsProfile& c, int T, long long m,
                              long long n) {
  detail::check_mn(m, n);
  return geometric_factor(c.eps_sens * c.kappa / c.gamma, T) *
         std::pow(static_cast<double>(m) / static_cast<double>(n), 1.0 / c.p);
}

// Performative excess risk (full performativity). Terms {2A, C,
// rademacher, L_a D_Z (A+K)}, all scaled by L_ell. Holds at 1 - delta/4.
inline BoundReport perf_excess_risk_bound(const ConstantsProfile& c, int T, long long m,
                                          long long n, double complexity_L2) {
  c.validate();
  detail::check_mn(m, n);
  if (T < 1) throw std::invalid_argument("perf_excess_risk_bound: T must be >= 1");
  if (complexity_L2 < 0.0)
    throw std::invalid_argument("perf_excess_risk_bound: complexity_L2 must be >= 0");
  const double A = population_radius_A(c, m, n);
  const double K = sample_growth_K(c, T, m, n);
  const double C = fournier_term(n, c.delta, c.p, c.nu, c.C_a, c.C_b);
  BoundReport r;
  r.name = "rq2-perf-excess";
  r.terms.emplace_back("population_shift_2A", c.L_ell * 2.0 * A);
  r.terms.emplace_back("sampling_C", c.L_ell * C);
  r.terms.emplace_back(
      "rademacher",
      c.L_ell * 2.0 * c.F / std::sqrt(static_cast<double>(n)) *
          (12.0 * complexity_L2 + std::sqrt(2.0 * std::log(1.0 / c.delta))));
  r.terms.emplace_back("argmin_shift", c.L_ell * c.L_a * c.D_Z * (A + K));
  r.confidence = 1.0 - c.delta / 4.0;
  r.inputs_hash = detail::profile_hash(c);
  r.finalize();
  return r;
}

// Auxiliary radius: max of the population-side (Wald) arm and the
// sample-side (damped diameter) arm.
inline double radius_R(long long m, long long n, double delta, double p, double D_Z,
                       double L_a_tilde) {
  detail::check_mn(m, n);
  const double wald_arm = std::pow(wald_upper(m, n, delta), 1.0 / p) * D_Z;
  const double sample_arm =
      std::pow(static_cast<double>(m) / static_cast<double>(n), 1.0 / p) * D_Z *
      L_a_tilde;
  return std::max(wald_arm, sample_arm);
}

inline double radius_R_frac(double share, long long n, double delta, double p,
                            double D_Z, double L_a_tilde) {
  const double wald_arm = std::pow(wald_upper_frac(share, n, delta), 1.0 / p) * D_Z;
  const double sample_arm = std::pow(share, 1.0 / p) * D_Z * L_a_tilde;
  return std::max(wald_arm, sample_arm);
}

// Two readings of the complexity term's Lipschitz part: the theorem's
// L_ell L_f R^{1-p} D_Z^p and the case-study decomposition L_ell L_f / R.
enum class LipschitzTermForm { dz_power, reciprocal_radius };

// Generalization gap bound I (Lipschitz models). Terms {complexity,
// sampling, performative}; holds at 1 - delta.
inline BoundReport gen_gap_I(const ConstantsProfile& c, double R, double complexity_inf,
                             LipschitzTermForm form = LipschitzTermForm::dz_power,
                             long long n = -1) {
  c.validate();
  if (n < 1) throw std::invalid_argument("gen_gap_I: n must be >= 1");
  if (complexity_inf < 0.0)
    throw std::invalid_argument("gen_gap_I: complexity_inf must be >= 0");
  if (!(R > 0.0) && c.p > 1.0)
    throw std::invalid_argument(
        "gen_gap_I: R == 0 is singular for p > 1; evaluate on a xi > 0 grid");
  const double inner = form == LipschitzTermForm::dz_power
                           ? c.L_ell * c.L_f * std::pow(R, 1.0 - c.p) * std::pow(c.D_Z, c.p)
                           : c.L_ell * c.L_f / R;
  BoundReport r;
  r.name = "gen-gap-1";
  r.terms.emplace_back("complexity",
                       48.0 / std::sqrt(static_cast<double>(n)) * (complexity_inf + inner));
  r.terms.emplace_back("sampling",
                       c.F * std::sqrt(2.0 * std::log(2.0 / c.delta) / static_cast<double>(n)));
  r.terms.emplace_back("performative", 2.0 * c.L_ell * R);
  r.confidence = 1.0 - c.delta;
  r.inputs_hash = detail::profile_hash(c);
  r.finalize();
  return r;
}

// Generalization gap bound II (weaker regularity): the complexity inner
// term becomes B 2^{p-1} (1 + D_Z/R)^p.
inline BoundReport gen_gap_II(const ConstantsProfile& c, double R,
                              double complexity_inf, double B, long long n = -1) {
  c.validate();
  if (n < 1) throw std::invalid_argument("gen_gap_II: n must be >= 1");
  if (B < 0.0) throw std::invalid_argument("gen_gap_II: B must be >= 0");
  if (complexity_inf < 0.0)
    throw std::invalid_argument("gen_gap_II: complexity_inf must be >= 0");
  if (!(R > 0.0))
    throw std::invalid_argument("gen_gap_II: R == 0 is singular; evaluate on a xi > 0 grid");
  const double inner =
      B * std::pow(2.0, c.p - 1.0) * std::pow(1.0 + c.D_Z / R, c.p);
  BoundReport r;
  r.name = "gen-gap-2";
  r.terms.emplace_back("complexity",
                       48.0 / std::sqrt(static_cast<double>(n)) * (complexity_inf + inner));
  r.terms.emplace_back("sampling",
                       c.F * std::sqrt(2.0 * std::log(2.0 / c.delta) / static_cast<double>(n)));
  r.terms.emplace_back("performative", 2.0 * c.L_ell * R);
  r.confidence = 1.0 - c.delta;
  r.inputs_hash = detail::profile_hash(c);
  r.finalize();
  return r;
}

// Cumulative performative excess risk over rounds T..T~: the RQ2 bound
// plus (T~ - T + 1) population-round terms. Holds at 1 - delta/5.
inline BoundReport cumulative_bound(const ConstantsProfile& c, int T, int T_tilde,
                                    long long m, long long n, double complexity_L2) {
  if (T_tilde < T) throw std::invalid_argument("cumulative_bound: need T~ >= T");
  BoundReport base = perf_excess_risk_bound(c, T, m, n, complexity_L2);
  const double per_round = c.L_ell * c.L_a *
                           std::pow(wald_upper(m, n, c.delta), 1.0 / c.p) * c.D_Z;
  BoundReport r;
  r.name = "rq3-cumulative";
  r.terms = base.terms;
  r.terms.emplace_back("population_rounds",
                       static_cast<double>(T_tilde - T + 1) * per_round);
  r.confidence = 1.0 - c.delta / 5.0;
  r.inputs_hash = detail::profile_hash(c);
  r.finalize();
  return r;
}

// ----------------------------------------------------- trace wrappers

// m enters the lemma as the worst round: m = max_t m_t.
inline BoundReport gen_gap_bound_rq1(const ConstantsProfile& c, const RermTrace& trace,
                                     long long n) {
  return gen_gap_bound_rq1(c, trace.T(), trace.m_max(), n);
}

inline BoundReport excess_risk_bound(const ConstantsProfile& c, const RermTrace& trace,
                                     long long n, double complexity_L2) {
  return excess_risk_bound(c, trace.T(), trace.m_max(), n, complexity_L2);
}

// The pooled corollary uses M_T over the effective sample size Tn.
inline double pooled_wald_upper(const RermTrace& trace, long long n, double delta) {
  std::vector<long long> ms(trace.shift_counts.begin(), trace.shift_counts.end());
  return pooled_wald_upper(ms, n, delta);
}

}  // namespace perfbound
