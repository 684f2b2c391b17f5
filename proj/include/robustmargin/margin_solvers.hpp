#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <string>
#include <vector>

#include "robustmargin/dataset.hpp"

namespace robustmargin {

enum class SolverStatus { optimal, infeasible, not_converged };

std::string to_string(SolverStatus s);

struct InfeasibleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Result of a margin program. For the robust program the duals satisfy the
/// stationarity identity w = sum_{i in S} alpha_i (y_i x_i - eps_i w/||w||);
/// for the plain program (eps = 0) this is the classical w = sum alpha_i y_i x_i.
/// Indices in support_set are 0-based.
struct MarginSolution {
  Eigen::VectorXd weights;
  Eigen::VectorXd duals;
  std::vector<Eigen::Index> support_set;  // {i : alpha_i > dual_tol}
  double objective_norm = 0.0;
  SolverStatus status = SolverStatus::infeasible;
  int sweeps = 0;  // coordinate-ascent sweeps spent in the last inner solve
};

inline constexpr double kDualTol = 1e-8;
inline constexpr double kKktTol = 1e-6;
inline constexpr double kSupportTol = 1e-6;

/// Solves min 1/2 ||w||^2 s.t. y_i x_i^T w >= m_i (all m_i > 0) by dual
/// coordinate ascent. Infeasible data is reported through status, not thrown.
MarginSolution solve_svm(const Dataset& d, const Eigen::VectorXd& margins);

/// Max-margin classifier: solve_svm with unit margins.
MarginSolution max_margin(const Dataset& d);

/// Existence bound 1/||w_M||: the robust program is solvable whenever
/// ||eps||_inf stays below it. Throws InfeasibleError if d is not separable.
double rm_existence_bound(const Dataset& d);

/// Uniform-budget closed form w_M / (1 - eps*||w_M||). Throws
/// InfeasibleError when eps*||w_M|| >= 1.
Eigen::VectorXd rm_uniform_closed_form(const MarginSolution& wM, double eps);

/// Robust max-margin classifier: min ||w|| s.t. y_i x_i^T w >= 1 + eps_i ||w||.
/// Solved by bisection on h(s) = ||solve_svm(d, 1 + eps*s)|| - s over the
/// bracket [||w_M||, ||w_M||/(1 - ||eps||_inf ||w_M||)], with warm-started
/// inner solves. Duals are re-expressed in the robust stationarity form.
MarginSolution rm_solve(const Dataset& d);

/// Indices with |y_i x_i^T w - (1 + eps_i ||w||)| <= tol * (1 + ||w||).
std::vector<Eigen::Index> support_vectors(const MarginSolution& sol, const Dataset& d,
                                          double tol = kSupportTol);

/// Stationarity residual ||w - sum_i alpha_i (y_i x_i - eps_i w/||w||)|| / (1+||w||).
double kkt_residual(const MarginSolution& sol, const Dataset& d);

/// Minimum robust margin over non-support samples; +infinity when every
/// sample is a support vector. Exceeds 1 at any robust optimum.
double theta(const MarginSolution& sol, const Dataset& d);

void save_solution_json(const MarginSolution& sol, const std::string& path);
MarginSolution load_solution_json(const std::string& path);

}  // namespace robustmargin
