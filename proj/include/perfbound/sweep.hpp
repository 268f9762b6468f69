// sweep.hpp - the xi-sweep: one bound evaluation per treatment share,
// optionally paired with a realized generalization gap from the
// semi-simulation (flip the sample, refit, flip the population, compare
// risks). Rows are computed in parallel and emitted ordered by xi.
#pragma once

#include <atomic>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "perfbound/bounds.hpp"
#include "perfbound/core.hpp"
#include "perfbound/logistic.hpp"
#include "perfbound/synthetic.hpp"
#include "perfbound/transition.hpp"

namespace perfbound {

enum class BoundVariant { gen_gap_I, gen_gap_II };

struct SweepConfig {
  std::vector<double> xi_grid;  // defaults to 0.01 .. 0.50 step 0.01
  long long n = 1500;
  int pop_n = 6000;
  std::uint64_t seed = 1;
  ConstantsProfile profile;
  BoundVariant variant = BoundVariant::gen_gap_I;
  // the case-study decomposition of the complexity term (L_ell L_f / R)
  LipschitzTermForm comp_form = LipschitzTermForm::reciprocal_radius;
  bool realized = true;         // run the semi-simulation per row
  int n_features = 28;
  double reg_lambda = 1.0;
  double theta_radius = 10.0;   // fit-side parameter ball
  int threads = 0;              // 0 = hardware concurrency

  static std::vector<double> default_grid() {
    std::vector<double> g;
    for (int k = 1; k <= 50; ++k) g.push_back(k / 100.0);
    return g;
  }

  void validate() const {
    profile.validate();
    for (const double xi : grid())
      if (!(xi > 0.0 && xi <= 1.0))
        throw std::invalid_argument("SweepConfig: xi values must be in (0, 1]");
    if (realized && n > pop_n)
      throw std::invalid_argument("SweepConfig: need n <= pop_n");
  }

  std::vector<double> grid() const {
    return xi_grid.empty() ? default_grid() : xi_grid;
  }
};

struct SweepRow {
  double xi = 0.0;
  double R = 0.0;
  double comp = 0.0;
  double samp = 0.0;
  double perf = 0.0;
  double total = 0.0;
  double realized_gap = std::numeric_limits<double>::quiet_NaN();
  long long m = 0;
  long long n = 0;
  std::string error;  // per-row fit failures; the sweep continues
};

inline std::string sweep_csv_header() {
  return "xi,R,comp,samp,perf,total,realized_gap,m,n";
}

inline std::string sweep_to_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream os;
  os << sweep_csv_header() << '\n';
  char buf[64];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.17g", r.xi);
    os << buf;
    for (const double v : {r.R, r.comp, r.samp, r.perf, r.total, r.realized_gap}) {
      std::snprintf(buf, sizeof buf, ",%.17g", v);
      os << buf;
    }
    os << ',' << r.m << ',' << r.n << '\n';
  }
  return os.str();
}

namespace detail {

struct SweepContext {
  const SweepConfig& cfg;
  const SyntheticData* data = nullptr;
  ParamVector theta1;  // fit on the raw sample, shared across rows
  ParamSpace space = ParamSpace::ball(1, 1.0);
  FitConfig fit_cfg;
};

inline SweepRow sweep_row(const SweepContext& ctx, double xi) {
  const SweepConfig& cfg = ctx.cfg;
  const ConstantsProfile& c = cfg.profile;
  SweepRow row;
  row.xi = xi;
  row.n = cfg.n;
  row.m = static_cast<long long>(std::ceil(xi * static_cast<double>(cfg.n) - 1e-12));

  // formula path: fully-effective flips give m/n = xi exactly
  row.R = radius_R_frac(xi, cfg.n, c.delta, c.p, c.D_Z, c.L_a_tilde);
  const double cinf = c.complexity_inf >= 0 ? c.complexity_inf : 0.0;
  const BoundReport rep =
      cfg.variant == BoundVariant::gen_gap_I
          ? gen_gap_I(c, row.R, cinf, cfg.comp_form, cfg.n)
          : gen_gap_II(c, row.R, cinf, c.B, cfg.n);
  row.comp = rep.term("complexity");
  row.samp = rep.term("sampling");
  row.perf = rep.term("performative");
  row.total = rep.total;

  if (!cfg.realized) return row;
  try {
    // flip the sample under the deployed model, refit
    const TransitionMap flip1 = TransitionMap::top_xi_flip(xi);
    const auto d1 = apply_transition(flip1, ctx.data->sample, ctx.theta1).first;
    const FitResult fit2 = erm_fit(d1, ctx.space, ctx.fit_cfg, &ctx.theta1);
    // roll out: the population and the sample both react to theta2
    const TransitionMap flip2 = TransitionMap::top_xi_flip(xi);
    const auto pop_shifted =
        apply_transition(flip2, ctx.data->population, fit2.theta).first;
    const auto sample_shifted = apply_transition(flip2, d1, fit2.theta).first;
    row.realized_gap = empirical_risk(pop_shifted, fit2.theta.v, 0.0) -
                       empirical_risk(sample_shifted, fit2.theta.v, 0.0);
  } catch (const std::exception& e) {
    row.error = e.what();
  }
  return row;
}

}  // namespace detail

inline std::vector<SweepRow> run_sweep(const SweepConfig& cfg) {
  cfg.validate();
  const std::vector<double> grid = cfg.grid();

  detail::SweepContext ctx{cfg, nullptr, {}, ParamSpace::ball(1, 1.0), {}};
  SyntheticData data{EmpiricalDistribution(DomainBox::unit(1, 1), {0.0, 0.0}),
                     EmpiricalDistribution(DomainBox::unit(1, 1), {0.0, 0.0})};
  if (cfg.realized) {
    GenConfig gen;
    gen.n_features = cfg.n_features;
    gen.pop_n = cfg.pop_n;
    gen.n = static_cast<int>(cfg.n);
    data = gen_synthetic(gen, cfg.seed);
    ctx.data = &data;
    ctx.space = ParamSpace::ball(param_dim(cfg.n_features, true), cfg.theta_radius);
    ctx.fit_cfg.reg_lambda = cfg.reg_lambda;
    ctx.fit_cfg.seed = cfg.seed;
    ctx.theta1 = erm_fit(data.sample, ctx.space, ctx.fit_cfg).theta;
  }

  const int want = cfg.threads > 0
                       ? cfg.threads
                       : static_cast<int>(std::thread::hardware_concurrency());
  const int workers = std::max(1, std::min<int>(want, static_cast<int>(grid.size())));
  std::vector<SweepRow> rows(grid.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next.fetch_add(1); i < grid.size(); i = next.fetch_add(1))
      rows[i] = detail::sweep_row(ctx, grid[i]);
  };
  std::vector<std::thread> pool;
  for (int t = 1; t < workers; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  return rows;
}

}  // namespace perfbound
