#pragma once

#include <random>
#include <vector>

#include "aloha/model.hpp"

namespace test_helpers {

/// Test-side randomness, independent of the library's counter-based streams.
inline std::mt19937_64 make_rng(std::uint64_t seed) { return std::mt19937_64{seed}; }

inline aloha::ValidatedModel poisson_model(std::vector<double> lambda, std::vector<double> p) {
  aloha::ModelParams params;
  params.lambda = lambda;
  params.p = std::move(p);
  params.arrival = aloha::IndependentPoisson{std::move(lambda)};
  return aloha::validate_params(params);
}

/// The two-class model used across the statistical experiments.
inline aloha::ValidatedModel reference_model() {
  return poisson_model({0.5, 0.5}, {1.0, 0.5});
}

/// Random valid Poisson model with K classes.
inline aloha::ValidatedModel random_model(std::mt19937_64& rng, int k) {
  std::uniform_real_distribution<double> lam(0.05, 1.5);
  std::uniform_real_distribution<double> imp(0.05, 1.0);
  std::vector<double> lambda(k), p(k);
  for (;;) {
    double sum = 0.0;
    for (int i = 0; i < k; ++i) {
      lambda[i] = lam(rng);
      sum += lambda[i];
    }
    if (sum > aloha::kInvE + 0.05) break;
  }
  for (int i = 0; i < k; ++i) p[i] = imp(rng);
  return poisson_model(lambda, p);
}

}  // namespace test_helpers
