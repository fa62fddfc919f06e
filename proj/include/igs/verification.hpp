#pragma once

#include <string>
#include <vector>

#include "igs/synthesis.hpp"

namespace igs {

// Self-check suites shared by the CLI `verify` subcommand and the test
// harness. Each suite pits a closed form against an independent numeric
// route and reports the worst deviation seen.

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Closed-form gradients vs central finite differences of the sample-averaged
/// loss on random small instances (relative error < 1e-5).
CheckResult check_gradients(int instances = 100, std::uint64_t seed = 12345);

/// Bracket calculus at random points: gradient of the coordinate maps,
/// same-group brackets and the nested inner product vs numeric
/// differentiation (1e-6 / 1e-6 / 1e-4 relative); cross-group brackets must
/// vanish identically and nested inners must be negative away from u = 0.
CheckResult check_brackets(int points = 50, std::uint64_t seed = 777);

/// Conservation of u_l^2/2 - ||v_l||^2 along the RK4 flow on an exactly
/// orthogonal noiseless instance: drift <= 1e-8 over t in [0, 50] at
/// dt = 1e-3, and halving dt shrinks the drift by at least 8x.
struct BalanceCheck {
  CheckResult result;
  double drift_dt = 0;
  double drift_half_dt = 0;
};
BalanceCheck check_balance(std::uint64_t seed = 4242);

/// Monte Carlo exceedance of || (1/n) X^T xi ||_inf over the threshold
/// 2 sqrt(2 sigma^2 log(2p) / n) with column-normalized gaussian designs:
/// frequency <= 1/(8 p^3) + 0.01.
struct NoiseBoundCheck {
  CheckResult result;
  double exceedance = 0;
  double bound = 0;
};
NoiseBoundCheck check_noise_bound(int trials = 2000, Index n = 100, Index p = 50,
                                  double sigma = 1.0, std::uint64_t seed = 2025);

std::vector<CheckResult> run_suite(const std::string& name);

}  // namespace igs
