#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <unistd.h>

#include "robustmargin/analysis.hpp"

using namespace robustmargin;

namespace {

Eigen::VectorXd random_vector(Eigen::Index p, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Eigen::VectorXd v(p);
  for (Eigen::Index j = 0; j < p; ++j) v[j] = normal(rng);
  return v;
}

Trajectory synthetic_log_trajectory(double a, std::size_t t_max) {
  Trajectory traj;
  traj.step_size = 1.0;
  for (std::size_t t = 100; t <= t_max; t = t * 3 / 2) {
    const double dist = a / std::log(static_cast<double>(t));
    const double c = 1.0 - dist * dist / 2.0;
    Checkpoint cp;
    cp.t = t;
    cp.weights = Eigen::Vector2d(c, std::sqrt(std::max(0.0, 1.0 - c * c)));
    traj.checkpoints.push_back(std::move(cp));
  }
  return traj;
}

}  // namespace

TEST_CASE("direction distance") {
  const Eigen::Vector3d w(1.0, 2.0, -0.5);
  CHECK(direction_distance(w, 4.2 * w) == 0.0);
  CHECK(direction_distance(w, -w) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(direction_distance(Eigen::Vector2d(1.0, 0.0), Eigen::Vector2d(0.0, 3.0)) ==
        doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  CHECK_THROWS_AS(direction_distance(Eigen::Vector2d(0.0, 0.0), Eigen::Vector2d(1.0, 0.0)),
                  std::domain_error);

  std::mt19937_64 rng(1);
  for (int rep = 0; rep < 25; ++rep) {
    const Eigen::VectorXd a = random_vector(6, rng);
    const Eigen::VectorXd b = random_vector(6, rng);
    const double dab = direction_distance(a, b);
    CHECK(dab == direction_distance(b, a));
    CHECK(direction_distance(0.3 * a, 7.0 * b) == doctest::Approx(dab).epsilon(1e-12));
    const double cosab = a.dot(b) / (a.norm() * b.norm());
    CHECK(dab * dab == doctest::Approx(2.0 - 2.0 * cosab).epsilon(1e-12));
    CHECK(dab >= 0.0);
    CHECK(dab <= 2.0);
  }
}

TEST_CASE("generalization error via the Gaussian angle formula") {
  GroundTruth g{Eigen::Vector3d(1.0, 0.0, 0.0)};
  CHECK(generalization_error(Eigen::Vector3d(2.5, 0.0, 0.0), g) == 0.0);
  CHECK(generalization_error(Eigen::Vector3d(0.0, 1.0, 0.0), g) ==
        doctest::Approx(0.5).epsilon(1e-15));

  SUBCASE("45 degrees gives 1/4, confirmed by Monte Carlo") {
    const Eigen::Vector3d w(1.0, 1.0, 0.0);
    CHECK(generalization_error(w, g) == doctest::Approx(0.25).epsilon(1e-12));
    const double mc = generalization_error_mc(w, g, 1000000, 99);
    CHECK(std::abs(generalization_error(w, g) - mc) < 0.002);
  }
  SUBCASE("scale invariance") {
    std::mt19937_64 rng(2);
    for (int rep = 0; rep < 10; ++rep) {
      Eigen::VectorXd wstar = random_vector(5, rng);
      wstar /= wstar.norm();
      const GroundTruth gt{wstar};
      const Eigen::VectorXd w = random_vector(5, rng);
      CHECK(generalization_error(w, gt) ==
            doctest::Approx(generalization_error(17.0 * w, gt)).epsilon(1e-15));
    }
  }
  SUBCASE("analytic value sits inside the Monte Carlo band") {
    std::mt19937_64 rng(3);
    for (int rep = 0; rep < 6; ++rep) {
      Eigen::VectorXd wstar = random_vector(6, rng);
      wstar /= wstar.norm();
      const GroundTruth gt{wstar};
      const Eigen::VectorXd w = random_vector(6, rng);
      const double exact = generalization_error(w, gt);
      const std::size_t samples = 400000;
      const double mc = generalization_error_mc(w, gt, samples, 500 + rep);
      const double se = std::sqrt(std::max(mc * (1.0 - mc), 1e-12) / samples);
      CHECK(std::abs(exact - mc) < 3.0 * se + 1e-12);
    }
  }
  SUBCASE("zero vector rejected") {
    CHECK_THROWS_AS(generalization_error(Eigen::Vector3d::Zero(), g), std::domain_error);
  }
  SUBCASE("worst-case test perturbation only raises the error") {
    const Eigen::Vector3d w(1.0, 0.3, 0.0);
    const double clean = generalization_error_mc(w, g, 200000, 7);
    const double robust_small = generalization_error_mc(w, g, 200000, 7, 0.2);
    const double robust_large = generalization_error_mc(w, g, 200000, 7, 0.8);
    CHECK(clean <= robust_small);
    CHECK(robust_small <= robust_large);
    CHECK(std::abs(clean - generalization_error(w, g)) < 0.005);
  }
}

TEST_CASE("log-rate fit") {
  SUBCASE("exact model is recovered") {
    const Trajectory traj = synthetic_log_trajectory(3.0, 100000);
    Eigen::VectorXd target(2);
    target << 1.0, 0.0;
    const ConvergenceFit fit = fit_log_rate(traj, target);
    CHECK(fit.coefficient == doctest::Approx(3.0).epsilon(1e-9));
    CHECK(fit.r_squared == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(fit.checkpoints_used >= 5);
  }
  SUBCASE("constant distances do not fit") {
    Trajectory traj;
    for (std::size_t t = 100; t <= 100000; t = t * 2) {
      Checkpoint cp;
      cp.t = t;
      cp.weights = Eigen::Vector2d(1.0, 0.4);  // fixed direction
      traj.checkpoints.push_back(std::move(cp));
    }
    Eigen::VectorXd target(2);
    target << 1.0, 0.0;
    const ConvergenceFit fit = fit_log_rate(traj, target);
    CHECK(fit.r_squared < 0.05);
  }
  SUBCASE("early checkpoints are ignored and scarcity is an error") {
    Trajectory traj = synthetic_log_trajectory(2.0, 100000);
    for (std::size_t t : {2ul, 10ul, 50ul}) {
      Checkpoint cp;
      cp.t = t;
      cp.weights = Eigen::Vector2d(0.0, 1.0);  // far away; must not affect the fit
      traj.checkpoints.insert(traj.checkpoints.begin(), cp);
    }
    Eigen::VectorXd target(2);
    target << 1.0, 0.0;
    CHECK(fit_log_rate(traj, target).coefficient == doctest::Approx(2.0).epsilon(1e-9));

    Trajectory tiny;
    for (std::size_t t : {100ul, 200ul, 400ul, 800ul}) {
      Checkpoint cp;
      cp.t = t;
      cp.weights = Eigen::Vector2d(1.0, 0.1);
      tiny.checkpoints.push_back(cp);
    }
    CHECK_THROWS_AS(fit_log_rate(tiny, target), std::invalid_argument);
  }
}

TEST_CASE("aggregation") {
  TrialRecord base;
  base.seed = 1;
  base.level = 0;
  base.eps = 0.4;
  base.status = "ok";
  base.ge_mm = 0.12;
  base.ge_rm = 0.10;

  SUBCASE("single trial has zero standard error") {
    const ExperimentReport r = aggregate({base});
    REQUIRE(r.aggregates.size() == 1);
    CHECK(r.aggregates[0].ge_mm_mean == 0.12);
    CHECK(r.aggregates[0].ge_mm_se == 0.0);
    CHECK(r.aggregates[0].trials_used == 1);
  }
  SUBCASE("duplicated trials keep the mean and zero the error") {
    const ExperimentReport r = aggregate({base, base, base, base});
    CHECK(r.aggregates[0].ge_rm_mean == 0.10);
    CHECK(r.aggregates[0].ge_rm_se == 0.0);
  }
  SUBCASE("known values aggregate to the hand-computed mean") {
    std::vector<TrialRecord> trials;
    double sum = 0.0;
    for (int k = 0; k < 20; ++k) {
      TrialRecord t = base;
      t.seed = static_cast<std::uint64_t>(k);
      t.ge_mm = 0.1 + 0.01 * k;
      sum += t.ge_mm;
      trials.push_back(t);
    }
    const ExperimentReport r = aggregate(trials);
    CHECK(r.aggregates[0].ge_mm_mean == doctest::Approx(sum / 20.0).epsilon(1e-15));
    CHECK(r.aggregates[0].ge_mm_se > 0.0);
  }
  SUBCASE("non-ok trials are excluded but counted") {
    TrialRecord bad = base;
    bad.seed = 9;
    bad.status = "rm_infeasible";
    bad.ge_mm = 1e9;
    const ExperimentReport r = aggregate({base, bad});
    CHECK(r.aggregates[0].trials_used == 1);
    CHECK(r.aggregates[0].trials_excluded == 1);
    CHECK(r.aggregates[0].ge_mm_mean == 0.12);
  }
  SUBCASE("empty input is rejected") {
    CHECK_THROWS_AS(aggregate({}), std::invalid_argument);
  }
}

TEST_CASE("report csv emission") {
  TrialRecord a;
  a.seed = 2;
  a.level = 0;
  a.eps = 0.1;
  a.status = "ok";
  a.ge_mm = 0.2;
  a.ge_rm = 0.15;
  TrialRecord b = a;
  b.level = 1;
  b.eps = 0.2;
  const ExperimentReport r = aggregate({a, b});

  const auto trials_path = std::filesystem::temp_directory_path() /
                           ("rm-trials-" + std::to_string(::getpid()) + ".csv");
  const auto agg_path = std::filesystem::temp_directory_path() /
                        ("rm-agg-" + std::to_string(::getpid()) + ".csv");
  save_report_trials_csv(r, trials_path.string());
  save_report_aggregate_csv(r, agg_path.string());

  std::ifstream tin(trials_path);
  std::string line;
  std::getline(tin, line);
  CHECK(line == "seed,level,eps,status,ge_mm,ge_rm");
  std::size_t rows = 0;
  while (std::getline(tin, line))
    if (!line.empty()) ++rows;
  CHECK(rows == 2);
  tin.close();

  std::ifstream ain(agg_path);
  std::getline(ain, line);
  CHECK(line ==
        "level,eps_mean,ge_mm_mean,ge_mm_se,ge_rm_mean,ge_rm_se,trials_used,trials_excluded");
  ain.close();
  std::filesystem::remove(trials_path);
  std::filesystem::remove(agg_path);
}
