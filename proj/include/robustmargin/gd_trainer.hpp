#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "robustmargin/dataset.hpp"
#include "robustmargin/loss.hpp"

namespace robustmargin {

/// Raised when the loss or gradient turns non-finite mid-run. Step-size
/// misuse should be loud, not clamped.
struct DivergenceError : std::runtime_error {
  DivergenceError(std::size_t iteration, const std::string& what);
  std::size_t iteration;
};

/// Geometric checkpoint schedule {0, 1, 2, ...} growing by `ratio`, always
/// ending at total_iters. Evenly spaced on a log axis.
std::vector<std::size_t> geometric_checkpoints(std::size_t total_iters, double ratio = 1.3);

struct GDConfig {
  double step_size = 0.0;     // eta
  std::size_t max_iters = 0;  // T; the run takes exactly this many steps
  /// Strictly increasing iteration indices, all <= max_iters. Empty means
  /// geometric_checkpoints(max_iters).
  std::vector<std::size_t> checkpoint_schedule;
  /// Defaults to the deterministic nonzero direction 1e-3 * Xbar/||Xbar||
  /// with Xbar = sum_i y_i x_i, which keeps the start away from the
  /// eps*||w|| kink at the origin.
  std::optional<Eigen::VectorXd> initial_weights;
};

Eigen::VectorXd default_initial_weights(const Dataset& d);

struct Checkpoint {
  std::size_t t = 0;
  Eigen::VectorXd weights;
  double loss = 0.0;
  double grad_norm = 0.0;
  double weight_norm = 0.0;
  double s_value = 0.0;  // (1/eta) * reference^T w_t
  Eigen::VectorXd robust_margins;
};

struct Trajectory {
  std::vector<Checkpoint> checkpoints;
  double step_size = 0.0;
  Eigen::VectorXd reference;  // direction used for s_value

  double min_robust_margin(std::size_t checkpoint_index) const;
};

/// Runs exactly cfg.max_iters full-batch steps w <- w - eta * grad L_eps(w),
/// recording diagnostics at the checkpoint schedule. s_value is computed
/// against `reference` when given (intended: w_RM), else against the final
/// iterate's direction. Warns to stderr when eta exceeds max_step_size (the
/// bound is sufficient, not necessary). Throws DivergenceError on non-finite
/// values and propagates the gradient's domain error at w = 0.
Trajectory train(const LossSpec& spec, const Dataset& d, const GDConfig& cfg,
                 const std::optional<Eigen::VectorXd>& reference = std::nullopt);

/// w / ||w||. Throws std::domain_error on the zero vector.
Eigen::VectorXd direction(const Eigen::VectorXd& w);

/// (1/eta) * reference^T w_t at every checkpoint. Strictly increasing when
/// the reference is the robust max-margin classifier.
std::vector<double> s_sequence(const Trajectory& traj, const Eigen::VectorXd& reference,
                               double eta);

/// CSV columns: t,loss,grad_norm,weight_norm,s_value,min_robust_margin.
void save_trajectory_csv(const Trajectory& traj, const std::string& path);
/// Sidecar weight dump, columns t,w1,...,wp.
void save_trajectory_weights_csv(const Trajectory& traj, const std::string& path);

}  // namespace robustmargin
