#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "robustmargin/dataset.hpp"
#include "robustmargin/loss.hpp"

namespace robustmargin {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;   // empty on success, diagnostic on failure
  double seconds = 0.0;
};

struct CheckOptions {
  bool quick = false;      // reduced trial counts and horizons
  std::uint64_t seed = 1;  // base seed for the random instances
};

/// Runs the invariant suite across all modules on seeded random instances.
std::vector<CheckResult> run_all_checks(const CheckOptions& opt = {});

/// Finite-difference certification of a candidate gradient for the robust
/// loss. Exposed with the gradient as a parameter so a deliberately broken
/// gradient can be shown to fail; run_all_checks wires in the real one.
using GradientFn =
    std::function<Eigen::VectorXd(const LossSpec&, const Dataset&, const Eigen::VectorXd&)>;
CheckResult check_gradient_against_fd(const GradientFn& gradient, int instances,
                                      std::uint64_t seed);

}  // namespace robustmargin
