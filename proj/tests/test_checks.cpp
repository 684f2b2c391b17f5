#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "robustmargin/checks.hpp"
#include "robustmargin/loss.hpp"

using namespace robustmargin;

TEST_CASE("the finite-difference certifier accepts the real gradient") {
  const CheckResult res = check_gradient_against_fd(robust_loss_gradient, 5, 1);
  CHECK(res.passed);
  CHECK(res.detail.empty());
}

TEST_CASE("the finite-difference certifier rejects a sign-flipped gradient") {
  const GradientFn flipped = [](const LossSpec& spec, const Dataset& d,
                                const Eigen::VectorXd& w) {
    return Eigen::VectorXd(-robust_loss_gradient(spec, d, w));
  };
  const CheckResult res = check_gradient_against_fd(flipped, 5, 1);
  CHECK_FALSE(res.passed);
  CHECK(!res.detail.empty());
}

TEST_CASE("the certifier also rejects a subtly scaled gradient") {
  const GradientFn scaled = [](const LossSpec& spec, const Dataset& d,
                               const Eigen::VectorXd& w) {
    return Eigen::VectorXd(1.001 * robust_loss_gradient(spec, d, w));
  };
  CHECK_FALSE(check_gradient_against_fd(scaled, 5, 1).passed);
}

TEST_CASE("the quick invariant suite is green and uniquely named") {
  CheckOptions opt;
  opt.quick = true;
  const auto results = run_all_checks(opt);
  CHECK(results.size() >= 20);
  std::set<std::string> names;
  for (const auto& r : results) {
    CAPTURE(r.name);
    CAPTURE(r.detail);
    CHECK(r.passed);
    names.insert(r.name);
  }
  CHECK(names.size() == results.size());
}
