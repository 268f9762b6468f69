#include <catch2/catch_amalgamated.hpp>

#include "perfbound/io.hpp"
#include "perfbound/logistic.hpp"
#include "perfbound/numeric.hpp"
#include "perfbound/synthetic.hpp"
#include "perfbound/transport.hpp"

using namespace perfbound;
using Catch::Approx;

namespace {

// oracle: central finite difference of the loss
double fd_grad(double y, const std::vector<double>& x, std::vector<double> theta,
               double lambda, std::size_t j, double h = 1e-6) {
  theta[j] += h;
  const double up = logistic_loss(y, x, theta, lambda);
  theta[j] -= 2 * h;
  const double dn = logistic_loss(y, x, theta, lambda);
  return (up - dn) / (2 * h);
}

EmpiricalDistribution small_synthetic(int n, int features, std::uint64_t seed) {
  GenConfig cfg;
  cfg.n_features = features;
  cfg.pop_n = n;
  cfg.n = n;
  return gen_synthetic(cfg, seed).sample;
}

}  // namespace

TEST_CASE("logistic loss at the symmetric point") {
  const std::vector<double> x{0.4};
  const std::vector<double> theta{0.0, 0.0};
  CHECK(logistic_loss(1.0, x, theta, 0.0) == Approx(std::log(2.0)).margin(1e-15));
  CHECK(logistic_loss(0.0, x, theta, 0.0) == Approx(std::log(2.0)).margin(1e-15));
}

TEST_CASE("logistic loss in the confident regime") {
  // theta^T x = 5 without bias: frozen oracle value log(1 + e^-5)
  const std::vector<double> x{1.0};
  const std::vector<double> theta{5.0};
  CHECK(logistic_loss(1.0, x, theta, 0.0, /*add_bias=*/false) ==
        Approx(0.006715348489118069).margin(1e-15));
}

TEST_CASE("non-binary labels are rejected") {
  const std::vector<double> x{0.4};
  const std::vector<double> theta{0.0, 0.0};
  CHECK_THROWS_AS(logistic_loss(0.5, x, theta, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(logistic_grad(2.0, x, theta, 0.0), std::invalid_argument);
}

TEST_CASE("gradient at theta = 0 is +-x/2") {
  const std::vector<double> x{0.3, 0.8};
  const std::vector<double> theta{0.0, 0.0, 0.0};
  const auto g1 = logistic_grad(1.0, x, theta, 0.0);
  CHECK(g1[0] == Approx(-0.15).margin(1e-15));
  CHECK(g1[1] == Approx(-0.4).margin(1e-15));
  CHECK(g1[2] == Approx(-0.5).margin(1e-15));
  const auto g0 = logistic_grad(0.0, x, theta, 0.0);
  CHECK(g0[0] == Approx(0.15).margin(1e-15));
  CHECK(g0[1] == Approx(0.4).margin(1e-15));
  CHECK(g0[2] == Approx(0.5).margin(1e-15));
}

TEST_CASE("gradient matches central finite differences on 100 random probes") {
  Rng rng(1234);
  int checked = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int dx = 1 + static_cast<int>(rng.below(6));
    std::vector<double> x(static_cast<std::size_t>(dx));
    for (double& v : x) v = rng.unit();
    std::vector<double> theta(static_cast<std::size_t>(dx) + 1);
    for (double& v : theta) v = rng.uniform(-2.0, 2.0);
    const double y = rng.below(2) ? 1.0 : 0.0;
    const double lambda = rng.unit();
    const auto g = logistic_grad(y, x, theta, lambda);
    for (std::size_t j = 0; j < theta.size(); ++j) {
      const double fd = fd_grad(y, x, theta, lambda, j);
      CHECK(std::abs(fd - g[j]) / std::max(1.0, std::abs(g[j])) <= 1e-5);
      ++checked;
    }
  }
  CHECK(checked >= 100);
}

TEST_CASE("erm_fit solves the one-dimensional stationarity equation") {
  // all y = 1 on a single constant-1 design column with lambda = 1; the
  // optimum solves sigma(t) - 1 + t = 0. Bisection oracle root:
  double lo = 0.0, hi = 1.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (sigmoid(mid) - 1.0 + mid < 0.0 ? lo : hi) = mid;
  }
  const double root = 0.5 * (lo + hi);
  CHECK(root == Approx(0.4010581375415470).margin(1e-12));

  DomainBox box;  // label only; the bias fold supplies the constant column
  box.dim_y = 1;
  box.dim_x = 0;
  box.lower = {0.0};
  box.upper = {1.0};
  const auto d = empirical_from_points(box, {{1.0}, {1.0}, {1.0}});
  FitConfig cfg;
  cfg.reg_lambda = 1.0;
  cfg.grad_tol = 1e-10;
  const FitResult fit = erm_fit(d, ParamSpace::ball(1, 10.0), cfg);
  REQUIRE(fit.theta.dim() == 1);
  CHECK(fit.theta.v[0] == Approx(root).margin(1e-8));
}

TEST_CASE("label-balanced symmetric dataset fits to zero") {
  const DomainBox box = DomainBox::unit(1, 2);
  const auto d = empirical_from_points(
      box, {{1.0, 0.2, 0.7}, {0.0, 0.2, 0.7}, {1.0, 0.9, 0.1}, {0.0, 0.9, 0.1}});
  FitConfig cfg;
  cfg.grad_tol = 1e-10;
  const FitResult fit = erm_fit(d, ParamSpace::ball(3, 10.0), cfg);
  CHECK(norm2(fit.theta.v) <= 1e-8);
}

TEST_CASE("erm_fit is bitwise deterministic") {
  const auto d = small_synthetic(120, 6, 7);
  FitConfig cfg;
  const ParamSpace space = ParamSpace::ball(7, 10.0);
  const FitResult a = erm_fit(d, space, cfg);
  const FitResult b = erm_fit(d, space, cfg);
  CHECK(a.theta.v == b.theta.v);
  CHECK(a.iters == b.iters);
  CHECK(a.config_hash == b.config_hash);
}

TEST_CASE("erm_fit reports max_iters exhaustion with the last iterate") {
  const auto d = small_synthetic(80, 4, 3);
  FitConfig cfg;
  cfg.max_iters = 2;
  cfg.grad_tol = 1e-14;
  try {
    erm_fit(d, ParamSpace::ball(5, 10.0), cfg);
    FAIL("expected FitError");
  } catch (const FitError& e) {
    CHECK(e.iters == 2);
    CHECK(e.last_theta.dim() == 5);
    CHECK(e.grad_norm > 0.0);
  }
}

TEST_CASE("post-fit gradient norm is within tolerance") {
  const auto d = small_synthetic(150, 5, 21);
  FitConfig cfg;
  cfg.grad_tol = 1e-9;
  const FitResult fit = erm_fit(d, ParamSpace::ball(6, 50.0), cfg);
  const auto g = empirical_risk_grad(d, fit.theta.v, cfg.reg_lambda);
  CHECK(norm2(g) <= cfg.grad_tol);
}

TEST_CASE("regularized Hessian keeps its minimum eigenvalue above reg_lambda") {
  Rng rng(99);
  for (int trial = 0; trial < 20; ++trial) {
    const auto d = small_synthetic(60, 4, 100 + trial);
    FitConfig cfg;
    cfg.reg_lambda = 0.5 + rng.unit();
    const FitResult fit = erm_fit(d, ParamSpace::ball(5, 20.0), cfg);
    const auto H = empirical_risk_hessian(d, fit.theta.v, cfg.reg_lambda);
    const double mineig = power_iteration_min_eig(H, fit.theta.dim());
    CHECK(mineig >= cfg.reg_lambda - 1e-8);
  }
}

TEST_CASE("monotone descent: risk is non-increasing along the iterates") {
  // run the solver loop manually through shrinking tolerances and track risk
  const auto d = small_synthetic(200, 8, 5);
  const ParamSpace space = ParamSpace::ball(9, 10.0);
  double prev = empirical_risk(d, std::vector<double>(9, 0.0), 1.0);
  for (const double tol : {1e-2, 1e-4, 1e-6, 1e-8}) {
    FitConfig cfg;
    cfg.grad_tol = tol;
    const FitResult fit = erm_fit(d, space, cfg);
    CHECK(fit.risk <= prev + 1e-12);
    prev = fit.risk;
  }
}

TEST_CASE("argmin stability under point perturbations") {
  // ||G(d) - G(d')|| <= (D_X/gamma + slack) W_p(d, d')
  const DomainBox box = DomainBox::unit(1, 3);
  Rng rng(17);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> flat;
    const int n = 40;
    for (int i = 0; i < n; ++i) {
      flat.push_back(rng.below(2) ? 1.0 : 0.0);
      for (int f = 0; f < 3; ++f) flat.push_back(rng.unit());
    }
    const EmpiricalDistribution d(box, flat);
    std::vector<double> flat2 = flat;
    const int moved = 1 + static_cast<int>(rng.below(4));
    for (int k = 0; k < moved; ++k) {
      const int i = static_cast<int>(rng.below(n));
      for (int f = 0; f < 3; ++f) flat2[static_cast<std::size_t>(i) * 4 + 1 + f] = rng.unit();
    }
    const EmpiricalDistribution d2(box, flat2);

    FitConfig cfg;
    cfg.reg_lambda = 1.0;
    cfg.grad_tol = 1e-10;
    const ParamSpace space = ParamSpace::ball(4, 20.0);
    const auto fa = erm_fit(d, space, cfg);
    const auto fb = erm_fit(d2, space, cfg);
    const double wp = wp_exact(d, d2, 2.0).distance;
    const double D_X = 2.0;  // feature box [0,1]^3 diameter sqrt(3), plus bias margin
    const double slack = 10 * cfg.grad_tol / cfg.reg_lambda;
    CHECK(euclid(fa.theta.v, fb.theta.v) <= (D_X / cfg.reg_lambda + slack) * wp + 1e-9);
  }
}

TEST_CASE("closed-form constants") {
  // L_ell = D_Z / (1 + e^{-D_Z D_Theta})
  CHECK(lipschitz_loss_constant(std::sqrt(5.0), 2000 * std::sqrt(5.0)) ==
        Approx(std::sqrt(5.0)).margin(1e-12));
  CHECK(lipschitz_loss_constant(std::sqrt(28.0), 1e4) ==
        Approx(std::sqrt(28.0)).margin(1e-12));
  CHECK(lipschitz_loss_constant(2.0, 1e-12) == Approx(1.0).margin(1e-9));

  const auto [la, lat] = argmin_lipschitz_constant(2.0, 1.0);
  CHECK(la == Approx(2.0).margin(1e-15));
  CHECK(lat == Approx(1.0 / 3).margin(1e-15));
  const auto [la0, lat0] = argmin_lipschitz_constant(0.0, 1.0);
  CHECK(la0 == 0.0);
  CHECK(lat0 == 1.0);
  const auto [la2, lat2] = argmin_lipschitz_constant(1.0, 2.0);
  CHECK(la2 == Approx(0.5).margin(1e-15));
  CHECK(lat2 == Approx(2.0 / 3).margin(1e-15));

  CHECK(prediction_lipschitz_constant(1.0) == 0.25);
  CHECK(prediction_lipschitz_constant(0.0) == 0.0);
  CHECK(prediction_lipschitz_constant(4.0) == 1.0);
}

TEST_CASE("fit result serializes") {
  const auto d = small_synthetic(50, 3, 77);
  const FitResult fit = erm_fit(d, ParamSpace::ball(4, 10.0), FitConfig{});
  const auto j = to_json(fit);
  CHECK(j.at("theta").get<std::vector<double>>() == fit.theta.v);
  CHECK(j.at("iters").get<int>() == fit.iters);
}
