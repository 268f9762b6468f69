// synthetic.hpp - jobseeker-like synthetic data: uniform features on
// [0,1]^k, binary label from a fixed logistic ground truth, and a
// seeded uniform subsample standing in for the cohort.
#pragma once

#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include "perfbound/core.hpp"
#include "perfbound/numeric.hpp"

namespace perfbound {

struct GenConfig {
  int n_features = 28;
  int pop_n = 6000;
  int n = 1500;

  // frozen ground truth: w_j = scale * sin(0.7 j + 0.3), chosen once so
  // the baseline model lands in the 0.60-0.65 AUC band with label
  // prevalence around 0.4
  double weight_scale = 0.45;
  double bias = -0.4;

  void validate() const {
    if (n_features < 1) throw std::invalid_argument("GenConfig: n_features < 1");
    if (pop_n < 1) throw std::invalid_argument("GenConfig: pop_n < 1");
    if (n < 1 || n > pop_n)
      throw std::invalid_argument("GenConfig: need 1 <= n <= pop_n");
  }

  std::vector<double> ground_truth_weights() const {
    std::vector<double> w(static_cast<std::size_t>(n_features));
    for (int j = 0; j < n_features; ++j)
      w[static_cast<std::size_t>(j)] = weight_scale * std::sin(0.7 * j + 0.3);
    return w;
  }
};

struct SyntheticData {
  EmpiricalDistribution population;
  EmpiricalDistribution sample;
};

// Reproducible given the seed: population first, then a Fisher-Yates
// subsample of size n. The box is [0,1]^{1+k} with the label first.
inline SyntheticData gen_synthetic(const GenConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  const DomainBox box = DomainBox::unit(1, cfg.n_features);
  const std::vector<double> w = cfg.ground_truth_weights();
  Rng rng(seed);

  const int dim = box.dim();
  std::vector<double> flat(static_cast<std::size_t>(cfg.pop_n) * dim);
  for (int i = 0; i < cfg.pop_n; ++i) {
    double s = cfg.bias;
    for (int j = 0; j < cfg.n_features; ++j) {
      const double x = rng.unit();
      flat[static_cast<std::size_t>(i) * dim + 1 + j] = x;
      s += w[static_cast<std::size_t>(j)] * x;
    }
    flat[static_cast<std::size_t>(i) * dim] = rng.bernoulli(sigmoid(s)) ? 1.0 : 0.0;
  }
  EmpiricalDistribution population(box, std::move(flat));

  std::vector<int> order = rng.permutation(cfg.pop_n);
  std::vector<double> sample_flat(static_cast<std::size_t>(cfg.n) * dim);
  for (int i = 0; i < cfg.n; ++i) {
    const auto src = population.point(order[static_cast<std::size_t>(i)]);
    std::copy(src.begin(), src.end(), sample_flat.begin() + static_cast<std::size_t>(i) * dim);
  }
  EmpiricalDistribution sample(box, std::move(sample_flat));
  return {std::move(population), std::move(sample)};
}

}  // namespace perfbound
