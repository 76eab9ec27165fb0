#pragma once

#include <cstdint>
#include <string>

namespace tripem {

// Central finite-difference verification of the analytic gradients through
// full networks and the triplet losses.
struct GradCheckConfig {
  std::uint64_t seed = 1;
  int trials = 1000;     // parameter coordinates to test across the suite
  double fd_step = 1e-5;
  double tolerance = 1e-3;  // relative error bound per coordinate
  double required_pass_rate = 0.99;
};

struct GradCheckResult {
  int tested = 0;
  int passed = 0;
  int skipped = 0;  // coordinates whose perturbation crossed a kink
  double worst_rel_error = 0.0;
  std::string worst_coordinate;

  double pass_rate() const {
    return tested == 0 ? 0.0 : static_cast<double>(passed) / tested;
  }
  bool ok(const GradCheckConfig& config) const {
    return tested >= config.trials && pass_rate() >= config.required_pass_rate;
  }
};

// Samples random (network, triplet, loss) instances over the F/I model
// variants and compares backward_triplet against central differences,
// coordinate by coordinate. Coordinates are only counted where the
// perturbed forward passes stay inside one piecewise-linear region (no
// ReLU, pool or clip kink in between).
GradCheckResult run_gradient_check(const GradCheckConfig& config);

}  // namespace tripem
