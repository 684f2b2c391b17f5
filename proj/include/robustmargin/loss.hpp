#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <string>

#include "robustmargin/dataset.hpp"

namespace robustmargin {

/// Two-sided exponential envelope parameters for -l'(u): for u > tau,
///   c*(1 - exp(-mu*u))*exp(-a*u) <= -l'(u) <= c*(1 + exp(-mu*u))*exp(-a*u).
/// Metadata for the tail certificate only; no algorithm consumes it.
struct TailParams {
  double a = 1.0;
  double c = 1.0;
  double tau = 1.0;
  double mu = 1.0;
};

/// A scalar classification loss l and its derivatives. Required properties:
/// l >= 0, l' < 0 everywhere (monotonically decreasing), |l''| <= smoothness.
/// Losses are pluggable; only the logistic loss ships.
struct LossSpec {
  std::string name;
  std::function<double(double)> value;
  std::function<double(double)> first_derivative;
  std::function<double(double)> second_derivative;
  double smoothness = 1.0;  // beta
  TailParams tail;
};

/// Logistic loss l(u) = log(1 + exp(-u)), beta = 1, tail a = c = mu = 1,
/// tau = 1. Evaluation is overflow-safe for large |u|.
LossSpec logistic();

/// Per-sample robust margins y_i x_i^T w - eps_i * ||w||.
Eigen::VectorXd robust_margins(const Dataset& d, const Eigen::VectorXd& w);

/// Worst-case empirical loss sum_i l(y_i x_i^T w - eps_i * ||w||).
double robust_loss(const LossSpec& spec, const Dataset& d, const Eigen::VectorXd& w);

/// Analytic gradient sum_i l'(y_i x_i^T w - eps_i ||w||) (y_i x_i - eps_i w/||w||).
/// Throws std::domain_error when ||w|| < 1e-12 and some eps_i > 0: the
/// eps*||w|| term is non-differentiable at the origin.
Eigen::VectorXd robust_loss_gradient(const LossSpec& spec, const Dataset& d,
                                     const Eigen::VectorXd& w);

/// Sampling oracle for the inner maximization max_{||z|| <= eps} l(y (x+z)^T w).
/// Draws `trials` points uniformly on the eps-sphere and always includes the
/// candidates z = 0 and z = -eps * y * w/||w||. Verification use only; the
/// closed form l(y x^T w - eps ||w||) is the exact maximum.
double inner_max_oracle(const LossSpec& spec, const Eigen::VectorXd& x, double y,
                        double eps, const Eigen::VectorXd& w, std::size_t trials,
                        std::uint64_t seed);

/// Largest singular value of X by power iteration on X^T X
/// (relative tolerance 1e-10, cap 10^4 iterations).
double spectral_norm(const Eigen::MatrixXd& X);

/// Step-size bound 2 / (beta * (sigma_max(X) + ||eps||_2)^2). Step sizes
/// below this keep gradient descent on the robust loss stable.
double max_step_size(const LossSpec& spec, const Dataset& d);

}  // namespace robustmargin
