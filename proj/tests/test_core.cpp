#include <catch2/catch_amalgamated.hpp>

#include "perfbound/core.hpp"
#include "perfbound/io.hpp"
#include "perfbound/numeric.hpp"

using namespace perfbound;
using Catch::Approx;

TEST_CASE("domain_diameter matches the case-study boxes") {
  CHECK(domain_diameter(DomainBox::unit(1, 27)) == Approx(std::sqrt(28.0)).epsilon(0).margin(1e-12));
  CHECK(domain_diameter(DomainBox::unit(1, 4)) == Approx(std::sqrt(5.0)).margin(1e-12));

  DomainBox single;
  single.dim_y = 1;
  single.dim_x = 0;
  single.lower = {3.0};
  single.upper = {3.0 + 0.73};
  CHECK(domain_diameter(single) == Approx(0.73).margin(1e-15));
}

TEST_CASE("domain_diameter rejects degenerate boxes") {
  DomainBox b;
  b.dim_y = 1;
  b.dim_x = 0;
  b.lower = {2.0};
  b.upper = {2.0};
  CHECK_THROWS_AS(domain_diameter(b), std::invalid_argument);
}

TEST_CASE("domain_diameter is monotone in every coordinate range") {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const int dim = 1 + static_cast<int>(rng.below(6));
    DomainBox b;
    b.dim_y = 1;
    b.dim_x = dim - 1;
    for (int c = 0; c < dim; ++c) {
      const double lo = rng.uniform(-2.0, 2.0);
      b.lower.push_back(lo);
      b.upper.push_back(lo + rng.unit() + 1e-3);
    }
    const double base = domain_diameter(b);
    DomainBox wider = b;
    const int c = static_cast<int>(rng.below(static_cast<std::uint64_t>(dim)));
    wider.upper[static_cast<std::size_t>(c)] += rng.unit();
    CHECK(domain_diameter(wider) >= base);
  }
}

TEST_CASE("empirical_from_points defaults to uniform weights") {
  const DomainBox box = DomainBox::unit(1, 1);
  const auto d = empirical_from_points(box, {{0.0, 0.1}, {1.0, 0.5}, {0.0, 0.9}});
  REQUIRE(d.n() == 3);
  for (int i = 0; i < 3; ++i) CHECK(d.weight(i) == Approx(1.0 / 3).margin(1e-15));
}

TEST_CASE("empirical_from_points normalizes explicit weights") {
  const DomainBox box = DomainBox::unit(1, 1);
  const auto d = empirical_from_points(box, {{0.0, 0.1}, {1.0, 0.5}}, {2.0, 2.0});
  CHECK(d.weight(0) == Approx(0.5).margin(1e-15));
  CHECK(d.weight(1) == Approx(0.5).margin(1e-15));
}

TEST_CASE("degenerate and malformed weights are rejected") {
  const DomainBox box = DomainBox::unit(1, 1);
  CHECK_THROWS_AS(empirical_from_points(box, {{0.0, 0.1}}, {0.0}), std::invalid_argument);
  CHECK_THROWS_AS(empirical_from_points(box, {{0.0, 0.1}}, {-1.0}), std::invalid_argument);
}

TEST_CASE("points outside the box are clamped or rejected with the offending index") {
  const DomainBox box = DomainBox::unit(1, 1);
  // within 1e-9: clamped onto the boundary
  const auto d = empirical_from_points(box, {{0.0, 1.0 + 5e-10}});
  CHECK(d.point(0)[1] == 1.0);
  // beyond: rejected, naming point 1
  try {
    empirical_from_points(box, {{0.0, 0.5}, {0.0, 1.5}});
    FAIL("expected rejection");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("point 1") != std::string::npos);
  }
}

TEST_CASE("constants_audit flags the documented regimes") {
  ConstantsProfile c;
  c.p = 2;
  c.nu = 4;
  c.eps_sens = 0.01;
  c.kappa = 1;
  c.gamma = 1;
  auto warnings = constants_audit(c);
  REQUIRE(warnings.size() == 1);
  CHECK(warnings[0].find("nu <= 2p") != std::string::npos);

  c.p = 1;
  CHECK(constants_audit(c).empty());

  c.eps_sens = 1.5;
  c.kappa = 1.0;
  c.gamma = 1.0;
  warnings = constants_audit(c);
  REQUIRE(warnings.size() == 1);
  CHECK(warnings[0].find(">= 1") != std::string::npos);

  c.eps_sens = 0.01;
  c.delta = 0.7;
  warnings = constants_audit(c);
  REQUIRE(warnings.size() == 1);
  CHECK(warnings[0].find("delta") != std::string::npos);
}

TEST_CASE("constants_audit is pure") {
  ConstantsProfile c;
  c.p = 2;
  c.nu = 3;
  c.eps_sens = 2.0;
  const auto a = constants_audit(c);
  const auto b = constants_audit(c);
  CHECK(a == b);
}

TEST_CASE("profile invariant: L_a_tilde * (1 + L_a) == 1") {
  ConstantsProfile c;
  c.L_a = 2.0;
  c.L_a_tilde = 0.25;  // wrong on purpose
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c.derive_la_tilde();
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("dataset CSV round-trips bit-identically") {
  const DomainBox box = DomainBox::unit(1, 3);
  Rng rng(42);
  std::vector<double> flat;
  std::vector<double> weights;
  for (int i = 0; i < 37; ++i) {
    flat.push_back(rng.below(2) ? 1.0 : 0.0);
    for (int f = 0; f < 3; ++f) flat.push_back(rng.unit());
    weights.push_back(0.5 + rng.unit());
  }
  const EmpiricalDistribution d(box, flat, weights);
  const std::string csv = dataset_to_csv(d, /*include_weights=*/true);
  const EmpiricalDistribution back = dataset_from_csv(csv, box);

  REQUIRE(back.n() == d.n());
  CHECK(back.flat() == d.flat());
  CHECK(back.weights() == d.weights());
  // and the re-serialization is byte-identical
  CHECK(dataset_to_csv(back, true) == csv);
}

TEST_CASE("profile and box JSON round-trip") {
  ConstantsProfile c;
  c.L_ell = std::sqrt(5.0);
  c.L_a = 2.0;
  c.derive_la_tilde();
  c.D_Z = std::sqrt(5.0);
  c.D_Theta = 2000 * std::sqrt(5.0);
  c.delta = 0.1;
  c.L_ell_sampling = 2.0;
  const ConstantsProfile back = profile_from_json(to_json(c));
  CHECK(back.L_ell == c.L_ell);
  CHECK(back.L_a_tilde == c.L_a_tilde);
  CHECK(back.L_ell_sampling == 2.0);

  const DomainBox box = DomainBox::unit(1, 4);
  const DomainBox bbox = box_from_json(to_json(box));
  CHECK(bbox.lower == box.lower);
  CHECK(bbox.upper == box.upper);
  CHECK(bbox.dim_x == 4);
}
