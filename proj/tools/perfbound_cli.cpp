// perfbound command line: fit models, run RERM traces, evaluate bound
// reports, sweep xi grids and run the built-in validation fixtures.
//
//   perfbound gen-data --out-prefix data --seed 1 --n 1500 --pop-n 6000
//   perfbound fit --data sample.csv --box box.json --lambda 1 --out fit.json
//   perfbound rerm --data sample.csv --box box.json --map map.json --T 3
//   perfbound bound --variant rq1-corollary --profile appA2.json --n 60147 --m 1816
//   perfbound sweep --config sweep.json --out sweep.csv
//   perfbound validate --suite ot-oracle
//
// Success prints JSON or CSV to stdout (or --out). Runtime failures exit
// 1 with a machine-readable JSON error on stderr; usage errors exit 2.

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "perfbound/perfbound.hpp"

namespace pb = perfbound;
using nlohmann::json;

namespace {

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty())
    std::cout << text;
  else
    pb::write_file(out_path, text);
}

pb::ConstantsProfile load_profile(const std::string& path) {
  return pb::profile_from_json(json::parse(pb::read_file(path)));
}

int cmd_gen_data(const std::string& prefix, std::uint64_t seed, int n, int pop_n,
                 int features) {
  pb::GenConfig cfg;
  cfg.n = n;
  cfg.pop_n = pop_n;
  cfg.n_features = features;
  const pb::SyntheticData data = pb::gen_synthetic(cfg, seed);
  pb::write_file(prefix + "_population.csv", pb::dataset_to_csv(data.population));
  pb::write_file(prefix + "_sample.csv", pb::dataset_to_csv(data.sample));
  pb::write_file(prefix + "_box.json", pb::to_json(data.sample.box()).dump(2) + "\n");
  json j{{"population", prefix + "_population.csv"},
         {"sample", prefix + "_sample.csv"},
         {"box", prefix + "_box.json"},
         {"seed", seed}};
  std::cout << j.dump(2) << "\n";
  return 0;
}

int cmd_fit(const std::string& data_path, const std::string& box_path, double lambda,
            double tol, int max_iters, double radius, const std::string& out) {
  const pb::DomainBox box = pb::box_from_json(json::parse(pb::read_file(box_path)));
  const pb::EmpiricalDistribution dist =
      pb::dataset_from_csv(pb::read_file(data_path), box);
  pb::FitConfig cfg;
  cfg.reg_lambda = lambda;
  cfg.grad_tol = tol;
  cfg.max_iters = max_iters;
  const pb::ParamSpace space = pb::ParamSpace::ball(pb::param_dim(box.dim_x, true), radius);
  const pb::FitResult fit = pb::erm_fit(dist, space, cfg);
  emit(pb::to_json(fit).dump(2) + "\n", out);
  return 0;
}

int cmd_rerm(const std::string& data_path, const std::string& box_path,
             const std::string& map_path, int T, double lambda, double radius,
             const std::string& out) {
  const pb::DomainBox box = pb::box_from_json(json::parse(pb::read_file(box_path)));
  const pb::EmpiricalDistribution dist =
      pb::dataset_from_csv(pb::read_file(data_path), box);
  const pb::TransitionMap map = pb::map_from_json(json::parse(pb::read_file(map_path)));
  pb::FitConfig cfg;
  cfg.reg_lambda = lambda;
  const pb::ParamSpace space = pb::ParamSpace::ball(pb::param_dim(box.dim_x, true), radius);
  const pb::RermTrace trace = pb::run_rerm(dist, map, T, space, cfg);
  emit(pb::trace_to_jsonl(trace), out);
  return 0;
}

int cmd_bound(const std::string& variant, const std::string& profile_path, long long n,
              long long m, int T, int T_tilde, std::optional<double> delta,
              double complexity_l2, double complexity_inf, std::optional<double> R_arg,
              const std::string& out) {
  pb::ConstantsProfile c = load_profile(profile_path);
  if (delta) c.delta = *delta;
  const double cl2 = complexity_l2 >= 0 ? complexity_l2
                     : c.complexity_l2 >= 0 ? c.complexity_l2
                                            : 0.0;
  const double cinf = complexity_inf >= 0 ? complexity_inf
                      : c.complexity_inf >= 0 ? c.complexity_inf
                                              : 0.0;
  pb::BoundReport rep;
  if (variant == "rq1-excess") {
    rep = pb::excess_risk_bound(c, T, m, n, cl2);
  } else if (variant == "rq1-corollary") {
    rep = pb::gen_gap_bound_rq1(c, T, m, n);
  } else if (variant == "rq2-perf-excess") {
    rep = pb::perf_excess_risk_bound(c, T, m, n, cl2);
  } else if (variant == "gen-gap-1" || variant == "gen-gap-2") {
    const double R = R_arg ? *R_arg
                           : pb::radius_R(m, n, c.delta, c.p, c.D_Z, c.L_a_tilde);
    rep = variant == "gen-gap-1"
              ? pb::gen_gap_I(c, R, cinf, pb::LipschitzTermForm::dz_power, n)
              : pb::gen_gap_II(c, R, cinf, c.B, n);
  } else if (variant == "rq3-cumulative") {
    rep = pb::cumulative_bound(c, T, T_tilde, m, n, cl2);
  } else {
    throw CLI::ValidationError("--variant", "unknown bound variant '" + variant + "'");
  }
  emit(pb::to_json(rep).dump(2) + "\n", out);
  return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& out) {
  const json j = json::parse(pb::read_file(config_path));
  pb::SweepConfig cfg;
  cfg.profile = pb::profile_from_json(j.at("profile"));
  if (j.contains("xi_grid")) cfg.xi_grid = j.at("xi_grid").get<std::vector<double>>();
  cfg.n = j.value("n", cfg.n);
  cfg.pop_n = j.value("pop_n", cfg.pop_n);
  cfg.seed = j.value("seed", cfg.seed);
  cfg.realized = j.value("realized", cfg.realized);
  cfg.n_features = j.value("n_features", cfg.n_features);
  cfg.reg_lambda = j.value("reg_lambda", cfg.reg_lambda);
  cfg.threads = j.value("threads", cfg.threads);
  const std::string variant = j.value("bound_variant", "gen_gap_I");
  if (variant == "gen_gap_II")
    cfg.variant = pb::BoundVariant::gen_gap_II;
  else if (variant != "gen_gap_I")
    throw std::invalid_argument("sweep config: unknown bound_variant '" + variant + "'");
  if (j.value("comp_form", "reciprocal_radius") == std::string("dz_power"))
    cfg.comp_form = pb::LipschitzTermForm::dz_power;
  const auto rows = pb::run_sweep(cfg);
  emit(pb::sweep_to_csv(rows), out);
  for (const auto& r : rows)
    if (!r.error.empty())
      std::cerr << json{{"xi", r.xi}, {"error", r.error}}.dump() << "\n";
  return 0;
}

// Built-in oracle fixtures, also exercised by the test suite.
int validate_ot_oracle(std::uint64_t seed);
int validate_gradcheck(std::uint64_t seed);
int validate_wald(std::uint64_t seed);

int cmd_validate(const std::string& suite, std::uint64_t seed) {
  if (suite == "ot-oracle") return validate_ot_oracle(seed);
  if (suite == "gradcheck") return validate_gradcheck(seed);
  if (suite == "wald") return validate_wald(seed);
  throw CLI::ValidationError("--suite", "unknown suite '" + suite + "'");
}

// exhaustive permutation transport for n <= 6 equal-weight supports
double brute_force_wp(const pb::EmpiricalDistribution& a,
                      const pb::EmpiricalDistribution& b, double p) {
  const int n = a.n();
  std::vector<int> perm(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
  double best = std::numeric_limits<double>::infinity();
  do {
    double cost = 0.0;
    for (int i = 0; i < n; ++i)
      cost += std::pow(pb::euclid(a.point(i), b.point(perm[static_cast<std::size_t>(i)])), p);
    best = std::min(best, cost / n);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return std::pow(best, 1.0 / p);
}

int validate_ot_oracle(std::uint64_t seed) {
  pb::Rng rng(seed);
  const pb::DomainBox box = pb::DomainBox::unit(1, 2);
  int failures = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + static_cast<int>(rng.below(5));
    auto draw = [&] {
      std::vector<double> flat;
      for (int i = 0; i < n; ++i) {
        flat.push_back(rng.below(2) ? 1.0 : 0.0);
        flat.push_back(rng.unit());
        flat.push_back(rng.unit());
      }
      return pb::EmpiricalDistribution(box, std::move(flat));
    };
    const auto a = draw();
    const auto b = draw();
    for (const double p : {1.0, 1.5, 2.0}) {
      const double exact = pb::wp_exact(a, b, p).distance;
      const double brute = brute_force_wp(a, b, p);
      if (std::abs(exact - brute) > 1e-9) {
        ++failures;
        std::cerr << json{{"trial", trial}, {"p", p}, {"exact", exact}, {"brute", brute}}
                         .dump()
                  << "\n";
      }
    }
  }
  std::cout << json{{"suite", "ot-oracle"}, {"trials", 50}, {"failures", failures}}.dump(2)
            << "\n";
  return failures == 0 ? 0 : 1;
}

int validate_gradcheck(std::uint64_t seed) {
  pb::Rng rng(seed);
  int failures = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int dx = 1 + static_cast<int>(rng.below(6));
    std::vector<double> x(static_cast<std::size_t>(dx));
    for (double& v : x) v = rng.unit();
    std::vector<double> theta(static_cast<std::size_t>(dx) + 1);
    for (double& v : theta) v = rng.uniform(-2.0, 2.0);
    const double y = rng.below(2) ? 1.0 : 0.0;
    const double lambda = rng.unit();
    const auto g = pb::logistic_grad(y, x, theta, lambda);
    const double h = 1e-6;
    for (std::size_t j = 0; j < theta.size(); ++j) {
      auto tp = theta, tm = theta;
      tp[j] += h;
      tm[j] -= h;
      const double fd =
          (pb::logistic_loss(y, x, tp, lambda) - pb::logistic_loss(y, x, tm, lambda)) /
          (2 * h);
      const double denom = std::max(1.0, std::abs(g[j]));
      if (std::abs(fd - g[j]) / denom > 1e-5) ++failures;
    }
  }
  std::cout << json{{"suite", "gradcheck"}, {"probes", 100}, {"failures", failures}}.dump(2)
            << "\n";
  return failures == 0 ? 0 : 1;
}

int validate_wald(std::uint64_t seed) {
  pb::Rng rng(seed);
  int failures = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const long long n = 1 + static_cast<long long>(rng.below(5000));
    const long long m = static_cast<long long>(rng.below(static_cast<std::uint64_t>(n) + 1));
    const int T = 1 + static_cast<int>(rng.below(8));
    const std::vector<long long> ms(static_cast<std::size_t>(T), m);
    const double delta = 0.01 + 0.48 * rng.unit();
    if (pb::pooled_wald_upper(ms, n, delta) > pb::wald_upper(m, n, delta) + 1e-12)
      ++failures;
  }
  std::cout << json{{"suite", "wald"}, {"trials", 1000}, {"failures", failures}}.dump(2)
            << "\n";
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"performative-prediction generalization bound toolkit"};
  app.require_subcommand(1);

  // gen-data
  auto* gen = app.add_subcommand("gen-data", "write a synthetic population/sample pair");
  std::string gen_prefix = "data";
  std::uint64_t gen_seed = 1;
  int gen_n = 1500, gen_pop = 6000, gen_features = 28;
  gen->add_option("--out-prefix", gen_prefix);
  gen->add_option("--seed", gen_seed);
  gen->add_option("--n", gen_n);
  gen->add_option("--pop-n", gen_pop);
  gen->add_option("--features", gen_features);

  // fit
  auto* fit = app.add_subcommand("fit", "deterministic regularized logistic ERM");
  std::string fit_data, fit_box, fit_out;
  double fit_lambda = 1.0, fit_tol = 1e-8, fit_radius = 1000.0;
  int fit_iters = 10000;
  fit->add_option("--data", fit_data)->required();
  fit->add_option("--box", fit_box)->required();
  fit->add_option("--lambda", fit_lambda);
  fit->add_option("--tol", fit_tol);
  fit->add_option("--max-iters", fit_iters);
  fit->add_option("--radius", fit_radius);
  fit->add_option("--out", fit_out);

  // rerm
  auto* rerm = app.add_subcommand("rerm", "repeated ERM trace under a transition map");
  std::string rerm_data, rerm_box, rerm_map, rerm_out;
  int rerm_T = 1;
  double rerm_lambda = 1.0, rerm_radius = 1000.0;
  rerm->add_option("--data", rerm_data)->required();
  rerm->add_option("--box", rerm_box)->required();
  rerm->add_option("--map", rerm_map)->required();
  rerm->add_option("--T", rerm_T)->required();
  rerm->add_option("--lambda", rerm_lambda);
  rerm->add_option("--radius", rerm_radius);
  rerm->add_option("--out", rerm_out);

  // bound
  auto* bound = app.add_subcommand("bound", "evaluate a bound report");
  std::string bound_variant, bound_profile, bound_out;
  long long bound_n = 0, bound_m = 0;
  int bound_T = 1, bound_Tt = 1;
  double bound_cl2 = -1.0, bound_cinf = -1.0;
  std::optional<double> bound_delta, bound_R;
  bound->add_option("--variant", bound_variant)->required();
  bound->add_option("--profile", bound_profile)->required();
  bound->add_option("--n", bound_n)->required();
  bound->add_option("--m", bound_m);
  bound->add_option("--T", bound_T);
  bound->add_option("--T-tilde", bound_Tt);
  bound->add_option("--delta", bound_delta);
  bound->add_option("--complexity-l2", bound_cl2);
  bound->add_option("--complexity-inf", bound_cinf);
  bound->add_option("--R", bound_R);
  bound->add_option("--out", bound_out);

  // sweep
  auto* sweep = app.add_subcommand("sweep", "xi-sweep of the gap bound");
  std::string sweep_config, sweep_out;
  sweep->add_option("--config", sweep_config)->required();
  sweep->add_option("--out", sweep_out);

  // validate
  auto* validate = app.add_subcommand("validate", "built-in oracle fixture suites");
  std::string val_suite;
  std::uint64_t val_seed = 1;
  validate->add_option("--suite", val_suite)->required();
  validate->add_option("--seed", val_seed);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help() << "\n";
    return 2;
  }

  try {
    if (gen->parsed())
      return cmd_gen_data(gen_prefix, gen_seed, gen_n, gen_pop, gen_features);
    if (fit->parsed())
      return cmd_fit(fit_data, fit_box, fit_lambda, fit_tol, fit_iters, fit_radius,
                     fit_out);
    if (rerm->parsed())
      return cmd_rerm(rerm_data, rerm_box, rerm_map, rerm_T, rerm_lambda, rerm_radius,
                      rerm_out);
    if (bound->parsed())
      return cmd_bound(bound_variant, bound_profile, bound_n, bound_m, bound_T,
                       bound_Tt, bound_delta, bound_cl2, bound_cinf, bound_R, bound_out);
    if (sweep->parsed()) return cmd_sweep(sweep_config, sweep_out);
    if (validate->parsed()) return cmd_validate(val_suite, val_seed);
  } catch (const std::exception& e) {
    std::cerr << json{{"error", e.what()}}.dump() << "\n";
    return 1;
  }
  return 0;
}
