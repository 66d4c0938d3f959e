#include "routerlab/policy.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace routerlab {

double prob_large(const RouterParams& params, const FeatureVector& f) {
  double z = 0.0;
  for (int i = 0; i < kFeatureDim; ++i) z += params.weights[i] * f[i];
  z = std::clamp(z, -kLogitClamp, kLogitClamp);
  return 1.0 / (1.0 + std::exp(-z));
}

RouterAction sample_action(const RouterParams& params, const FeatureVector& f,
                           RngStream& rng) {
  return rng.u01() < prob_large(params, f) ? RouterAction::LARGE
                                           : RouterAction::SMALL;
}

LogProbGrad logprob_and_grad(const RouterParams& params,
                             const FeatureVector& f, RouterAction action) {
  double p = prob_large(params, f);
  LogProbGrad out;
  double ind = action == RouterAction::LARGE ? 1.0 : 0.0;
  out.logprob = action == RouterAction::LARGE ? std::log(p) : std::log1p(-p);
  for (int i = 0; i < kFeatureDim; ++i) out.grad[i] = (ind - p) * f[i];
  return out;
}

double decision_kl(double p, double q) {
  p = std::clamp(p, kKlProbClamp, 1.0 - kKlProbClamp);
  q = std::clamp(q, kKlProbClamp, 1.0 - kKlProbClamp);
  return p * std::log(p / q) + (1.0 - p) * std::log((1.0 - p) / (1.0 - q));
}

void save_checkpoint(const std::string& path, const RouterParams& params,
                     long iteration) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
  char buf[64];
  out << "# router checkpoint\n";
  out << "# version: " << params.version << "\n";
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(params.schema_hash));
  out << "# schema: " << buf << "\n";
  out << "# iteration: " << iteration << "\n";
  for (int i = 0; i < kFeatureDim; ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g", params.weights[i]);
    out << buf << "\n";
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read checkpoint: " + path);
  Checkpoint ck;
  ck.params.schema_hash = 0;
  std::string line;
  int wi = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream hs(line.substr(1));
      std::string key;
      hs >> key;
      if (key == "version:") hs >> ck.params.version;
      else if (key == "schema:") {
        std::string hex;
        hs >> hex;
        ck.params.schema_hash = std::stoull(hex, nullptr, 16);
      } else if (key == "iteration:") hs >> ck.iteration;
      continue;
    }
    if (wi >= kFeatureDim)
      throw std::runtime_error("checkpoint has too many weights: " + path);
    ck.params.weights[wi++] = std::stod(line);
  }
  if (wi != kFeatureDim)
    throw std::runtime_error("checkpoint has too few weights: " + path);
  if (ck.params.schema_hash != feature_schema_hash())
    throw std::runtime_error("checkpoint schema mismatch: " + path);
  return ck;
}

}  // namespace routerlab
