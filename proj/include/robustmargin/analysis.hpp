#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <string>
#include <vector>

#include "robustmargin/dataset.hpp"
#include "robustmargin/gd_trainer.hpp"

namespace robustmargin {

/// || w1/||w1|| - w2/||w2|| ||, in [0, 2]. Throws std::domain_error on zero
/// vectors.
double direction_distance(const Eigen::VectorXd& w1, const Eigen::VectorXd& w2);

/// Exact misclassification probability of sign(w^T x) against sign(w*^T x)
/// under isotropic Gaussian x: arccos(<w/||w||, w*>) / pi.
double generalization_error(const Eigen::VectorXd& w, const GroundTruth& g);

/// Monte Carlo misclassification estimate on `samples` Gaussian draws. With
/// eps > 0 each test point is worst-case shifted against the evaluated
/// classifier, i.e. a draw counts as an error when y x^T w - eps||w|| < 0.
double generalization_error_mc(const Eigen::VectorXd& w, const GroundTruth& g,
                               std::size_t samples, std::uint64_t seed,
                               double eps = 0.0);

/// Least-squares fit of the logarithmic decay model d(t) = a / log t.
struct ConvergenceFit {
  double coefficient = 0.0;  // a
  double r_squared = 0.0;    // clamped to [0, 1]
  std::size_t checkpoints_used = 0;
};

/// Fits d(t)*log(t) = a over checkpoints with t >= 100, where
/// d(t) = direction_distance(w_t, target). Requires at least five qualifying
/// checkpoints.
ConvergenceFit fit_log_rate(const Trajectory& traj, const Eigen::VectorXd& target);

/// One (trial, budget-level) outcome of a generalization experiment.
struct TrialRecord {
  std::uint64_t seed = 0;
  int level = 0;      // index on the per-trial eps grid
  double eps = 0.0;   // budget magnitude at this level for this trial
  std::string status; // "ok", "mm_infeasible", "rm_infeasible", ...
  double ge_mm = 0.0;
  double ge_rm = 0.0;
};

struct LevelAggregate {
  int level = 0;
  double eps_mean = 0.0;
  double ge_mm_mean = 0.0;
  double ge_mm_se = 0.0;
  double ge_rm_mean = 0.0;
  double ge_rm_se = 0.0;
  int trials_used = 0;
  int trials_excluded = 0;
};

struct ExperimentReport {
  std::vector<TrialRecord> trials;
  std::vector<LevelAggregate> aggregates;
};

/// Per-level means and standard errors over trials with status "ok".
/// SE = 0 by convention for a single trial.
ExperimentReport aggregate(const std::vector<TrialRecord>& trials);

/// One row per trial per level: seed,level,eps,status,ge_mm,ge_rm.
void save_report_trials_csv(const ExperimentReport& report, const std::string& path);
/// One row per level: level,eps_mean,ge_mm_mean,ge_mm_se,ge_rm_mean,ge_rm_se,
/// trials_used,trials_excluded.
void save_report_aggregate_csv(const ExperimentReport& report, const std::string& path);

}  // namespace robustmargin
