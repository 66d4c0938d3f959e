#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "routerlab/env.hpp"
#include "routerlab/rng.hpp"

namespace routerlab {

inline std::uint64_t feature_schema_hash() { return fnv1a64(kFeatureSchema); }

// Logistic routing policy over observation features:
// P(LARGE | f) = sigmoid(w . f), logit clamped to [-30, 30].
struct RouterParams {
  FeatureVector weights{};
  int version = 1;
  std::uint64_t schema_hash = feature_schema_hash();
};

constexpr double kLogitClamp = 30.0;
constexpr double kKlProbClamp = 1e-6;

double prob_large(const RouterParams& params, const FeatureVector& f);

RouterAction sample_action(const RouterParams& params, const FeatureVector& f,
                           RngStream& rng);

struct LogProbGrad {
  double logprob = 0.0;
  FeatureVector grad{};  // d logprob / d weights = (1[LARGE] - p) * f
};

LogProbGrad logprob_and_grad(const RouterParams& params,
                             const FeatureVector& f, RouterAction action);

// KL between two Bernoulli routing decisions, probabilities clamped to
// [1e-6, 1 - 1e-6] before the logs.
double decision_kl(double p, double q);

// Plain-text checkpoint: '#'-prefixed header with version, schema hash and
// iteration count, then one weight per line.
void save_checkpoint(const std::string& path, const RouterParams& params,
                     long iteration);
struct Checkpoint {
  RouterParams params;
  long iteration = 0;
};
Checkpoint load_checkpoint(const std::string& path);

}  // namespace routerlab
