#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "scenematch/config.hpp"

namespace scenematch {

struct GradcheckOptions {
  uint64_t seed = 7;
  int n = 4;      // image nodes
  int m = 5;      // text nodes
  int d = 8;
  int K = 2;
  int batch = 4;
  double eps = 1e-5;
  double tolerance = 1e-5;
  int max_attempts = 10;
  // fault-injection mode: perturb one recorded gradient before comparing so
  // the check must fail (negative control for the oracle itself)
  bool corrupt = false;
};

struct GradcheckReport {
  bool pass = false;
  double max_rel_err = 0.0;
  std::string worst_param;
  uint64_t seed_used = 0;
  int attempts = 0;
  // per-tensor max relative error, sorted by name
  std::vector<std::pair<std::string, double>> per_param;

  std::string summary() const;
};

// Recorded-gradient vs central-difference comparison of the full training
// loss on a small synthetic batch. Instances whose loss sits too close to a
// hinge kink, an argmax tie, or an activation kink are discarded and redrawn
// with the next seed, up to max_attempts.
GradcheckReport run_gradcheck(const GradcheckOptions& opt = {});

}  // namespace scenematch
