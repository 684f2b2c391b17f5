#include "robustmargin/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <random>

#include "num_format.hpp"

namespace robustmargin {

double direction_distance(const Eigen::VectorXd& w1, const Eigen::VectorXd& w2) {
  const double n1 = w1.norm(), n2 = w2.norm();
  if (n1 == 0.0 || n2 == 0.0) throw std::domain_error("direction_distance: zero vector");
  if (w1.size() != w2.size())
    throw std::invalid_argument("direction_distance: dimension mismatch");
  return (w1 / n1 - w2 / n2).norm();
}

double generalization_error(const Eigen::VectorXd& w, const GroundTruth& g) {
  const double wn = w.norm();
  if (wn == 0.0) throw std::domain_error("generalization_error: zero vector");
  if (w.size() != g.true_weights.size())
    throw std::invalid_argument("generalization_error: dimension mismatch");
  const double c = std::clamp(w.dot(g.true_weights) / wn, -1.0, 1.0);
  return std::acos(c) / M_PI;
}

double generalization_error_mc(const Eigen::VectorXd& w, const GroundTruth& g,
                               std::size_t samples, std::uint64_t seed, double eps) {
  const double wn = w.norm();
  if (wn == 0.0) throw std::domain_error("generalization_error_mc: zero vector");
  if (samples < 1) throw std::invalid_argument("generalization_error_mc: samples >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd x(w.size());
  std::size_t errors = 0;
  for (std::size_t k = 0; k < samples; ++k) {
    for (Eigen::Index j = 0; j < x.size(); ++j) x[j] = normal(rng);
    const double truth = x.dot(g.true_weights);
    const double y = truth >= 0.0 ? 1.0 : -1.0;
    if (y * x.dot(w) - eps * wn < 0.0) ++errors;
  }
  return static_cast<double>(errors) / static_cast<double>(samples);
}

ConvergenceFit fit_log_rate(const Trajectory& traj, const Eigen::VectorXd& target) {
  std::vector<double> d, logt;
  for (const auto& cp : traj.checkpoints) {
    if (cp.t < 100) continue;
    d.push_back(direction_distance(cp.weights, target));
    logt.push_back(std::log(static_cast<double>(cp.t)));
  }
  if (d.size() < 5)
    throw std::invalid_argument("fit_log_rate: need at least 5 checkpoints with t >= 100");

  // Least squares for d(t) * log t = a has the closed-form mean.
  double a = 0.0;
  for (std::size_t k = 0; k < d.size(); ++k) a += d[k] * logt[k];
  a /= static_cast<double>(d.size());

  double mean_d = 0.0;
  for (double v : d) mean_d += v;
  mean_d /= static_cast<double>(d.size());

  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t k = 0; k < d.size(); ++k) {
    const double pred = a / logt[k];
    ss_res += (d[k] - pred) * (d[k] - pred);
    ss_tot += (d[k] - mean_d) * (d[k] - mean_d);
  }

  ConvergenceFit fit;
  fit.coefficient = a;
  fit.checkpoints_used = d.size();
  if (ss_tot == 0.0) fit.r_squared = ss_res == 0.0 ? 1.0 : 0.0;
  else fit.r_squared = std::clamp(1.0 - ss_res / ss_tot, 0.0, 1.0);
  return fit;
}

ExperimentReport aggregate(const std::vector<TrialRecord>& trials) {
  if (trials.empty()) throw std::invalid_argument("aggregate: no trials");
  ExperimentReport report;
  report.trials = trials;
  std::stable_sort(report.trials.begin(), report.trials.end(),
                   [](const TrialRecord& a, const TrialRecord& b) {
                     return a.seed != b.seed ? a.seed < b.seed : a.level < b.level;
                   });

  struct Bucket {
    std::vector<const TrialRecord*> ok;
    int excluded = 0;
  };
  std::map<int, Bucket> by_level;
  for (const auto& t : report.trials) {
    if (t.status == "ok") by_level[t.level].ok.push_back(&t);
    else ++by_level[t.level].excluded;
  }

  auto mean_se = [](const std::vector<double>& xs) {
    // Identical rows report SE = 0 exactly, matching the single-trial
    // convention.
    if (std::all_of(xs.begin(), xs.end(), [&](double x) { return x == xs.front(); }))
      return std::pair<double, double>{xs.front(), 0.0};
    const auto k = static_cast<double>(xs.size());
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= k;
    double var = 0.0;
    for (double x : xs) var += (x - mean) * (x - mean);
    var /= (k - 1.0);
    return std::pair<double, double>{mean, std::sqrt(var / k)};
  };

  for (const auto& [level, bucket] : by_level) {
    LevelAggregate agg;
    agg.level = level;
    agg.trials_used = static_cast<int>(bucket.ok.size());
    agg.trials_excluded = bucket.excluded;
    if (!bucket.ok.empty()) {
      std::vector<double> eps, mm, rm;
      for (const auto* r : bucket.ok) {
        eps.push_back(r->eps);
        mm.push_back(r->ge_mm);
        rm.push_back(r->ge_rm);
      }
      agg.eps_mean = mean_se(eps).first;
      std::tie(agg.ge_mm_mean, agg.ge_mm_se) = mean_se(mm);
      std::tie(agg.ge_rm_mean, agg.ge_rm_se) = mean_se(rm);
    }
    report.aggregates.push_back(agg);
  }
  return report;
}

void save_report_trials_csv(const ExperimentReport& report, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "seed,level,eps,status,ge_mm,ge_rm\n";
  for (const auto& t : report.trials)
    out << t.seed << "," << t.level << "," << detail::format_double(t.eps) << "," << t.status
        << "," << detail::format_double(t.ge_mm) << "," << detail::format_double(t.ge_rm)
        << "\n";
  if (!out) throw std::runtime_error("write failed: " + path);
}

void save_report_aggregate_csv(const ExperimentReport& report, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "level,eps_mean,ge_mm_mean,ge_mm_se,ge_rm_mean,ge_rm_se,trials_used,trials_excluded\n";
  for (const auto& a : report.aggregates)
    out << a.level << "," << detail::format_double(a.eps_mean) << ","
        << detail::format_double(a.ge_mm_mean) << "," << detail::format_double(a.ge_mm_se)
        << "," << detail::format_double(a.ge_rm_mean) << ","
        << detail::format_double(a.ge_rm_se) << "," << a.trials_used << ","
        << a.trials_excluded << "\n";
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace robustmargin
