#include "robustmargin/gd_trainer.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>

#include "num_format.hpp"

namespace robustmargin {

DivergenceError::DivergenceError(std::size_t iter, const std::string& what)
    : std::runtime_error("diverged at iteration " + std::to_string(iter) + ": " + what),
      iteration(iter) {}

std::vector<std::size_t> geometric_checkpoints(std::size_t total_iters, double ratio) {
  if (ratio <= 1.0) throw std::invalid_argument("geometric_checkpoints: ratio > 1");
  std::vector<std::size_t> ts{0};
  for (std::size_t t = 1; t < total_iters;) {
    ts.push_back(t);
    const auto next = static_cast<std::size_t>(std::ceil(static_cast<double>(t) * ratio));
    t = std::max(t + 1, next);
  }
  if (total_iters > 0) ts.push_back(total_iters);
  return ts;
}

Eigen::VectorXd default_initial_weights(const Dataset& d) {
  Eigen::VectorXd xbar = d.features.transpose() * d.labels;
  const double norm = xbar.norm();
  if (norm == 0.0) {
    xbar = Eigen::VectorXd::Zero(d.p());
    xbar[0] = 1.0;
    return 1e-3 * xbar;
  }
  return (1e-3 / norm) * xbar;
}

double Trajectory::min_robust_margin(std::size_t checkpoint_index) const {
  return checkpoints.at(checkpoint_index).robust_margins.minCoeff();
}

Trajectory train(const LossSpec& spec, const Dataset& d, const GDConfig& cfg,
                 const std::optional<Eigen::VectorXd>& reference) {
  d.validate();
  if (cfg.step_size <= 0.0) throw std::invalid_argument("train: step_size > 0");

  std::vector<std::size_t> schedule =
      cfg.checkpoint_schedule.empty() ? geometric_checkpoints(cfg.max_iters)
                                      : cfg.checkpoint_schedule;
  for (std::size_t k = 0; k < schedule.size(); ++k) {
    if (schedule[k] > cfg.max_iters)
      throw std::invalid_argument("train: checkpoint index beyond max_iters");
    if (k > 0 && schedule[k] <= schedule[k - 1])
      throw std::invalid_argument("train: checkpoint schedule must be strictly increasing");
  }

  const double bound = max_step_size(spec, d);
  if (cfg.step_size >= bound)
    std::cerr << "warning: step size " << cfg.step_size
              << " is not below the stability bound " << bound
              << "; proceeding (the bound is sufficient, not necessary)\n";

  Eigen::VectorXd w = cfg.initial_weights ? *cfg.initial_weights : default_initial_weights(d);
  if (w.size() != d.p()) throw std::invalid_argument("train: initial weights have wrong dimension");
  if (reference && reference->size() != d.p())
    throw std::invalid_argument("train: reference has wrong dimension");

  const bool any_budget = d.budgets.maxCoeff() > 0.0;
  const Eigen::Index n = d.n();

  Trajectory traj;
  traj.step_size = cfg.step_size;
  traj.checkpoints.reserve(schedule.size());

  Eigen::VectorXd margins(n), lp(n), grad;
  std::size_t next_cp = 0;
  for (std::size_t t = 0;; ++t) {
    const double wn = w.norm();
    if (any_budget && wn < 1e-12)
      throw std::domain_error("robust_loss_gradient: not differentiable at w = 0 (iteration " +
                              std::to_string(t) + ")");
    margins = d.labels.cwiseProduct(d.features * w) - d.budgets * wn;
    for (Eigen::Index i = 0; i < n; ++i) lp[i] = spec.first_derivative(margins[i]);
    grad = d.features.transpose() * lp.cwiseProduct(d.labels);
    if (any_budget) grad -= (lp.dot(d.budgets) / wn) * w;
    if (!grad.allFinite()) throw DivergenceError(t, "non-finite gradient");

    if (next_cp < schedule.size() && t == schedule[next_cp]) {
      double loss = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) loss += spec.value(margins[i]);
      if (!std::isfinite(loss)) throw DivergenceError(t, "non-finite loss");
      Checkpoint cp;
      cp.t = t;
      cp.weights = w;
      cp.loss = loss;
      cp.grad_norm = grad.norm();
      cp.weight_norm = wn;
      cp.robust_margins = margins;
      traj.checkpoints.push_back(std::move(cp));
      ++next_cp;
    }
    if (t == cfg.max_iters) break;
    w -= cfg.step_size * grad;
  }

  if (reference) traj.reference = *reference;
  else traj.reference = w.norm() > 0.0 ? Eigen::VectorXd(w / w.norm())
                                       : Eigen::VectorXd::Zero(d.p());
  for (auto& cp : traj.checkpoints)
    cp.s_value = traj.reference.dot(cp.weights) / cfg.step_size;
  return traj;
}

Eigen::VectorXd direction(const Eigen::VectorXd& w) {
  const double n = w.norm();
  if (n == 0.0) throw std::domain_error("direction: zero vector");
  return w / n;
}

std::vector<double> s_sequence(const Trajectory& traj, const Eigen::VectorXd& reference,
                               double eta) {
  if (reference.norm() == 0.0) throw std::invalid_argument("s_sequence: reference is zero");
  if (eta <= 0.0) throw std::invalid_argument("s_sequence: eta > 0");
  std::vector<double> s;
  s.reserve(traj.checkpoints.size());
  for (const auto& cp : traj.checkpoints) s.push_back(reference.dot(cp.weights) / eta);
  return s;
}

void save_trajectory_csv(const Trajectory& traj, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "t,loss,grad_norm,weight_norm,s_value,min_robust_margin\n";
  for (const auto& cp : traj.checkpoints) {
    out << cp.t << "," << detail::format_double(cp.loss) << ","
        << detail::format_double(cp.grad_norm) << ","
        << detail::format_double(cp.weight_norm) << ","
        << detail::format_double(cp.s_value) << ","
        << detail::format_double(cp.robust_margins.minCoeff()) << "\n";
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

void save_trajectory_weights_csv(const Trajectory& traj, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  const Eigen::Index p = traj.checkpoints.empty() ? 0 : traj.checkpoints.front().weights.size();
  out << "t";
  for (Eigen::Index j = 1; j <= p; ++j) out << ",w" << j;
  out << "\n";
  for (const auto& cp : traj.checkpoints) {
    out << cp.t;
    for (Eigen::Index j = 0; j < p; ++j) out << "," << detail::format_double(cp.weights[j]);
    out << "\n";
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace robustmargin
