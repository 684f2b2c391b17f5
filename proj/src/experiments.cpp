#include "robustmargin/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <thread>
#include <vector>

#include "robustmargin/loss.hpp"
#include "num_format.hpp"

namespace robustmargin {

int effective_thread_count(int requested) {
  int count = requested > 0 ? requested : static_cast<int>(std::thread::hardware_concurrency());
  if (count < 1) count = 1;
  if (const char* cap = std::getenv("ROBUST_MARGIN_THREADS")) {
    const int limit = std::atoi(cap);
    if (limit >= 1) count = std::min(count, limit);
  }
  return count;
}

namespace {

// Runs fn(0..jobs-1) on a small pool; each job writes its own slot, so the
// output is identical for any pool width. The first job failure is rethrown
// on the calling thread after the pool drains.
void parallel_for(int jobs, int threads, const std::function<void(int)>& fn) {
  if (threads <= 1 || jobs <= 1) {
    for (int j = 0; j < jobs; ++j) fn(j);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const int j = next.fetch_add(1);
      if (j >= jobs) return;
      try {
        fn(j);
      } catch (...) {
        const std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  const int width = std::min(threads, jobs);
  pool.reserve(static_cast<std::size_t>(width));
  for (int k = 0; k < width; ++k) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

Dataset shift_away_from_boundary(const Dataset& d, const GroundTruth& g) {
  Dataset out = d;
  for (Eigen::Index i = 0; i < d.n(); ++i)
    out.features.row(i) += d.budgets[i] * d.labels[i] * g.true_weights.transpose();
  return out;
}

}  // namespace

std::string to_string(ShiftMode mode) {
  switch (mode) {
    case ShiftMode::none: return "none";
    case ShiftMode::toward: return "toward";
    case ShiftMode::away: return "away";
  }
  return "unknown";
}

ExperimentReport run_fig1(const Fig1Config& cfg) {
  if (cfg.trials < 1 || cfg.levels < 1) throw std::invalid_argument("run_fig1: trials, levels >= 1");
  std::vector<std::vector<TrialRecord>> rows(static_cast<std::size_t>(cfg.trials));

  auto run_trial = [&](int trial) {
    const std::uint64_t seed = cfg.seed0 + static_cast<std::uint64_t>(trial);
    auto [clean, truth] = generate_gaussian(cfg.n, cfg.p, seed, cfg.min_margin);
    const MarginSolution mm_clean = max_margin(clean);
    auto& out = rows[static_cast<std::size_t>(trial)];

    if (mm_clean.status != SolverStatus::optimal) {
      for (int level = 0; level < cfg.levels; ++level)
        out.push_back({seed, level, 0.0, "mm_infeasible", 0.0, 0.0});
      return;
    }
    const double bound = 1.0 / mm_clean.objective_norm;

    for (int level = 0; level < cfg.levels; ++level) {
      const double eps =
          cfg.levels == 1 ? 0.0
                          : cfg.grid_cap * bound * static_cast<double>(level) /
                                static_cast<double>(cfg.levels - 1);
      TrialRecord rec;
      rec.seed = seed;
      rec.level = level;
      rec.eps = eps;

      // The perturbed subset is fixed per trial; only its radius grows.
      Dataset budgeted = assign_budgets(clean, BudgetScheme::fraction(cfg.q, eps, seed));
      Dataset train_set = budgeted;
      if (cfg.shift_mode == ShiftMode::toward)
        train_set = apply_adversarial_shift(budgeted, truth);
      else if (cfg.shift_mode == ShiftMode::away)
        train_set = shift_away_from_boundary(budgeted, truth);

      const MarginSolution mm = max_margin(train_set);
      if (mm.status != SolverStatus::optimal) {
        rec.status = "mm_" + to_string(mm.status);
        out.push_back(rec);
        continue;
      }
      const MarginSolution rm = rm_solve(train_set);
      if (rm.status != SolverStatus::optimal) {
        rec.status = "rm_" + to_string(rm.status);
        out.push_back(rec);
        continue;
      }
      rec.status = "ok";
      if (cfg.test_perturbed) {
        rec.ge_mm = generalization_error_mc(mm.weights, truth, cfg.mc_samples, seed, eps);
        rec.ge_rm = generalization_error_mc(rm.weights, truth, cfg.mc_samples, seed, eps);
      } else {
        rec.ge_mm = generalization_error(mm.weights, truth);
        rec.ge_rm = generalization_error(rm.weights, truth);
      }
      out.push_back(rec);
    }
  };

  parallel_for(cfg.trials, effective_thread_count(cfg.threads), run_trial);

  std::vector<TrialRecord> all;
  for (const auto& r : rows) all.insert(all.end(), r.begin(), r.end());
  return aggregate(all);
}

Fig2Result run_fig2(const Fig2Config& cfg) {
  Fig2Result res;
  res.seed = cfg.seed;

  auto [clean, truth] = generate_gaussian(cfg.n, cfg.p, cfg.seed, cfg.min_margin);
  const MarginSolution mm = max_margin(clean);
  if (mm.status != SolverStatus::optimal)
    throw InfeasibleError("run_fig2: generated dataset is not separable");
  const double bound = 1.0 / mm.objective_norm;

  Dataset d = assign_budgets(clean, BudgetScheme::uniform_random(0.0, bound, cfg.seed + 1));
  const MarginSolution rm = rm_solve(d);
  if (rm.status != SolverStatus::optimal)
    throw InfeasibleError("run_fig2: robust classifier unavailable (status " +
                          to_string(rm.status) + ")");

  const LossSpec spec = logistic();
  GDConfig gd;
  gd.step_size = cfg.eta_factor * max_step_size(spec, d);
  gd.max_iters = cfg.iters;
  gd.checkpoint_schedule = geometric_checkpoints(cfg.iters);
  // Guarantee a t = 1000 checkpoint: the convergence criteria compare against it.
  if (cfg.iters >= 1000) {
    auto& sched = gd.checkpoint_schedule;
    sched.insert(std::lower_bound(sched.begin(), sched.end(), std::size_t{1000}),
                 std::size_t{1000});
    sched.erase(std::unique(sched.begin(), sched.end()), sched.end());
  }

  res.trajectory = train(spec, d, gd, rm.weights);
  res.mm = mm;
  res.rm = rm;
  res.eta = gd.step_size;
  res.direction_gap = direction_distance(mm.weights, rm.weights);
  for (const auto& cp : res.trajectory.checkpoints) {
    res.checkpoint_ts.push_back(cp.t);
    res.dist_rm.push_back(direction_distance(cp.weights, rm.weights));
    res.dist_mm.push_back(direction_distance(cp.weights, mm.weights));
  }
  res.fit = fit_log_rate(res.trajectory, rm.weights);
  return res;
}

void save_fig2_curves_csv(const std::vector<Fig2Result>& runs, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "seed,t,dist_rm,dist_mm\n";
  for (const auto& run : runs)
    for (std::size_t k = 0; k < run.checkpoint_ts.size(); ++k)
      out << run.seed << "," << run.checkpoint_ts[k] << ","
          << detail::format_double(run.dist_rm[k]) << ","
          << detail::format_double(run.dist_mm[k]) << "\n";
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace robustmargin
