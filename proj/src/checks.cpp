#include "robustmargin/checks.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <limits>
#include <random>
#include <sstream>
#include <unistd.h>

#include <Eigen/SVD>

#include "robustmargin/analysis.hpp"
#include "robustmargin/gd_trainer.hpp"
#include "robustmargin/margin_solvers.hpp"

namespace robustmargin {

namespace {

struct Failure {
  std::string detail;
};

void require(bool ok, const std::string& detail) {
  if (!ok) throw Failure{detail};
}

std::string fmt(double v) {
  std::ostringstream ss;
  ss.precision(6);
  ss << v;
  return ss.str();
}

Eigen::VectorXd random_vector(Eigen::Index p, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd v(p);
  for (Eigen::Index j = 0; j < p; ++j) v[j] = scale * normal(rng);
  return v;
}

Dataset random_dataset(Eigen::Index n, Eigen::Index p, std::uint64_t seed, double max_eps) {
  auto [d, truth] = generate_gaussian(n, p, seed, 0.0);
  if (max_eps > 0.0) d = assign_budgets(d, BudgetScheme::uniform_random(0.0, max_eps, seed + 17));
  return d;
}

Eigen::VectorXd fd_gradient(const LossSpec& spec, const Dataset& d, const Eigen::VectorXd& w) {
  const double h = 1e-6 * (1.0 + w.norm());
  Eigen::VectorXd g(w.size());
  for (Eigen::Index j = 0; j < w.size(); ++j) {
    Eigen::VectorXd wp = w, wm = w;
    wp[j] += h;
    wm[j] -= h;
    g[j] = (robust_loss(spec, d, wp) - robust_loss(spec, d, wm)) / (2.0 * h);
  }
  return g;
}

// Projected gradient ascent on the SVM dual; an independent route to the
// same QP that dual coordinate ascent solves.
double svm_norm_by_projected_gradient(const Dataset& d, const Eigen::VectorXd& m,
                                      int iters) {
  const Eigen::Index n = d.n();
  Eigen::MatrixXd B = d.features;
  for (Eigen::Index i = 0; i < n; ++i) B.row(i) *= d.labels[i];
  const Eigen::MatrixXd G = B * B.transpose();
  const double step = 1.0 / Eigen::JacobiSVD<Eigen::MatrixXd>(G).singularValues()[0];
  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(n);
  for (int it = 0; it < iters; ++it)
    alpha = (alpha + step * (m - G * alpha)).cwiseMax(0.0);
  return (B.transpose() * alpha).norm();
}

// Minimal robust-feasible norm for p = 2 by sweeping unit directions; per
// direction the smallest feasible radius is max_i 1/(y_i x_i^T u - eps_i).
double rm_norm_by_direction_grid(const Dataset& d, double angle_step) {
  double best = std::numeric_limits<double>::infinity();
  for (double phi = 0.0; phi < 2.0 * M_PI; phi += angle_step) {
    Eigen::Vector2d u(std::cos(phi), std::sin(phi));
    double radius = 0.0;
    bool feasible = true;
    for (Eigen::Index i = 0; i < d.n(); ++i) {
      const double den = d.labels[i] * d.features.row(i).dot(u) - d.budgets[i];
      if (den <= 0.0) {
        feasible = false;
        break;
      }
      radius = std::max(radius, 1.0 / den);
    }
    if (feasible) best = std::min(best, radius);
  }
  return best;
}

std::filesystem::path temp_file(const std::string& stem) {
  return std::filesystem::temp_directory_path() /
         (stem + "-" + std::to_string(::getpid()) + ".csv");
}

}  // namespace

CheckResult check_gradient_against_fd(const GradientFn& gradient, int instances,
                                      std::uint64_t seed) {
  CheckResult res;
  res.name = "loss.gradient-matches-finite-differences";
  const auto start = std::chrono::steady_clock::now();
  try {
    const LossSpec spec = logistic();
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<Eigen::Index> pick_n(4, 40), pick_p(2, 15);
    std::uniform_real_distribution<double> pick_scale(0.1, 10.0);
    for (int k = 0; k < instances; ++k) {
      const Dataset d = random_dataset(pick_n(rng), pick_p(rng), seed * 1000 + k, 0.4);
      Eigen::VectorXd w = random_vector(d.p(), rng);
      w *= pick_scale(rng) / w.norm();
      const Eigen::VectorXd g = gradient(spec, d, w);
      const Eigen::VectorXd fd = fd_gradient(spec, d, w);
      const double rel = (g - fd).norm() / (1.0 + fd.norm());
      require(rel < 1e-5, "instance " + std::to_string(k) + ": rel err " + fmt(rel));
    }
    res.passed = true;
  } catch (const Failure& f) {
    res.detail = f.detail;
  } catch (const std::exception& e) {
    res.detail = e.what();
  }
  res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return res;
}

std::vector<CheckResult> run_all_checks(const CheckOptions& opt) {
  std::vector<CheckResult> results;
  const std::uint64_t seed = opt.seed;
  const LossSpec spec = logistic();

  auto run = [&](const std::string& name, const std::function<void()>& body) {
    CheckResult res;
    res.name = name;
    const auto start = std::chrono::steady_clock::now();
    try {
      body();
      res.passed = true;
    } catch (const Failure& f) {
      res.detail = f.detail;
    } catch (const std::exception& e) {
      res.detail = e.what();
    }
    res.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    results.push_back(res);
  };

  run("dataset.csv-roundtrip", [&] {
    const Dataset d = random_dataset(17, 5, seed, 0.7);
    const auto path = temp_file("robustmargin-roundtrip");
    save_csv(d, path.string());
    const Dataset back = load_csv(path.string());
    std::filesystem::remove(path);
    require(back.features == d.features && back.labels == d.labels && back.budgets == d.budgets,
            "round-trip is not exact");
  });

  run("dataset.generated-separable-by-truth", [&] {
    for (std::uint64_t s = seed; s < seed + 3; ++s) {
      auto [d, truth] = generate_gaussian(60, 8, s, 0.0);
      const Eigen::VectorXd m = d.labels.cwiseProduct(d.features * truth.true_weights);
      require(m.minCoeff() > 0.0, "seed " + std::to_string(s) + ": margin " + fmt(m.minCoeff()));
    }
  });

  run("dataset.shift-moves-rows-by-budget", [&] {
    auto [d0, truth] = generate_gaussian(40, 6, seed + 1, 0.0);
    const Dataset d = assign_budgets(d0, BudgetScheme::uniform_random(0.0, 1.5, seed + 2));
    const Dataset shifted = apply_adversarial_shift(d, truth);
    for (Eigen::Index i = 0; i < d.n(); ++i) {
      const double moved = (shifted.features.row(i) - d.features.row(i)).norm();
      require(std::abs(moved - d.budgets[i]) <= 1e-12 * (1.0 + d.budgets[i]),
              "row " + std::to_string(i) + " moved " + fmt(moved) + " != " + fmt(d.budgets[i]));
    }
  });

  run("dataset.generation-deterministic", [&] {
    auto a = generate_gaussian(25, 4, seed, 0.1);
    auto b = generate_gaussian(25, 4, seed, 0.1);
    require(to_csv(a.first) == to_csv(b.first) &&
                a.second.true_weights == b.second.true_weights,
            "same seed produced different bytes");
  });

  run("loss.logistic-values", [&] {
    require(std::abs(spec.value(0.0) - std::log(2.0)) < 1e-15, "l(0) != log 2");
    require(std::abs(spec.first_derivative(0.0) + 0.5) < 1e-15, "l'(0) != -0.5");
    require(std::isfinite(spec.value(-745.0)) && std::abs(spec.value(-745.0) - 745.0) < 1e-9,
            "l(-745) overflowed");
    require(spec.value(745.0) >= 0.0 && spec.value(745.0) < 1e-300, "l(745) not tiny");
  });

  run("loss.derivatives-consistent", [&] {
    for (double u = -30.0; u <= 30.0; u += 0.5) {
      const double h = 1e-6 * (1.0 + std::abs(u));
      const double fd1 = (spec.value(u + h) - spec.value(u - h)) / (2.0 * h);
      require(std::abs(spec.first_derivative(u) - fd1) <= 1e-6 * (1.0 + std::abs(fd1)),
              "l' mismatch at u=" + fmt(u));
      const double fd2 =
          (spec.first_derivative(u + h) - spec.first_derivative(u - h)) / (2.0 * h);
      require(std::abs(spec.second_derivative(u) - fd2) <= 1e-5 * (1.0 + std::abs(fd2)),
              "l'' mismatch at u=" + fmt(u));
      require(std::abs(spec.second_derivative(u)) <= spec.smoothness + 1e-12,
              "smoothness violated at u=" + fmt(u));
      require(spec.first_derivative(u) < 0.0, "l' not negative at u=" + fmt(u));
    }
  });

  run("loss.closed-form-equals-inner-max", [&] {
    std::mt19937_64 rng(seed + 3);
    std::uniform_int_distribution<Eigen::Index> pick_p(1, 5);
    std::uniform_real_distribution<double> pick_eps(0.0, 2.0);
    const int cases = opt.quick ? 20 : 50;
    const std::size_t trials = opt.quick ? 2000 : 5000;
    for (int k = 0; k < cases; ++k) {
      const Eigen::Index p = pick_p(rng);
      const Eigen::VectorXd x = random_vector(p, rng);
      Eigen::VectorXd w = random_vector(p, rng);
      if (w.norm() == 0.0) w.setOnes();
      const double y = (k % 2 == 0) ? 1.0 : -1.0;
      const double eps = pick_eps(rng);
      const double closed = spec.value(y * x.dot(w) - eps * w.norm());
      const double oracle = inner_max_oracle(spec, x, y, eps, w, trials, seed + 100 + k);
      require(std::abs(closed - oracle) <= 1e-12, "case " + std::to_string(k) + ": |closed-oracle| = " +
                                                     fmt(std::abs(closed - oracle)));
    }
  });

  results.push_back(
      check_gradient_against_fd(robust_loss_gradient, opt.quick ? 8 : 20, seed + 4));

  run("loss.monotone-in-budgets", [&] {
    std::mt19937_64 rng(seed + 5);
    for (int k = 0; k < 10; ++k) {
      const Dataset d = random_dataset(20, 6, seed + 200 + k, 0.5);
      Dataset bigger = d;
      bigger.budgets.array() += 0.3;
      const Eigen::VectorXd w = random_vector(6, rng);
      require(robust_loss(spec, bigger, w) >= robust_loss(spec, d, w) - 1e-12,
              "loss decreased when budgets grew");
    }
  });

  run("loss.tail-certificate", [&] {
    const TailParams& tp = spec.tail;
    for (int u = 1; u <= 50; ++u) {
      const double v = -spec.first_derivative(static_cast<double>(u));
      const double envelope = tp.c * std::exp(-tp.a * u);
      const double lo = envelope * (1.0 - std::exp(-tp.mu * u));
      const double hi = envelope * (1.0 + std::exp(-tp.mu * u));
      // The logistic envelope gap is exp(-2u), far below double resolution
      // for large u; allow rounding-level slack.
      require(v >= lo * (1.0 - 1e-12) && v <= hi * (1.0 + 1e-12),
              "tail envelope violated at u=" + std::to_string(u));
    }
  });

  run("loss.spectral-norm-matches-svd", [&] {
    std::mt19937_64 rng(seed + 6);
    for (int k = 0; k < 5; ++k) {
      const Dataset d = random_dataset(30, 7, seed + 300 + k, 0.0);
      const double power = spectral_norm(d.features);
      const double svd = Eigen::JacobiSVD<Eigen::MatrixXd>(d.features).singularValues()[0];
      require(std::abs(power - svd) <= 1e-8 * svd, "power " + fmt(power) + " vs svd " + fmt(svd));
    }
  });

  run("gd.update-exactness", [&] {
    const Dataset d = random_dataset(12, 4, seed + 7, 0.3);
    GDConfig cfg;
    cfg.step_size = 0.5 * max_step_size(spec, d);
    cfg.max_iters = 40;
    cfg.checkpoint_schedule.resize(41);
    for (std::size_t t = 0; t <= 40; ++t) cfg.checkpoint_schedule[t] = t;
    const Trajectory traj = train(spec, d, cfg);
    for (std::size_t k = 0; k + 1 < traj.checkpoints.size(); ++k) {
      const auto& a = traj.checkpoints[k];
      const auto& b = traj.checkpoints[k + 1];
      const Eigen::VectorXd expect =
          a.weights - cfg.step_size * robust_loss_gradient(spec, d, a.weights);
      require((expect - b.weights).norm() <= 1e-12 * (1.0 + expect.norm()),
              "update mismatch at t=" + std::to_string(a.t));
    }
  });

  run("gd.long-run-witnesses", [&] {
    auto [clean, truth] = generate_gaussian(30, 10, seed + 8, 1.0);
    const double bound = rm_existence_bound(clean);
    const Dataset d = assign_budgets(clean, BudgetScheme::uniform(0.3 * bound));
    GDConfig cfg;
    cfg.step_size = 0.9 * max_step_size(spec, d);
    cfg.max_iters = opt.quick ? 30000 : 100000;
    const Trajectory traj = train(spec, d, cfg);
    const auto& first = traj.checkpoints.front();
    const auto& last = traj.checkpoints.back();
    require(last.weight_norm > 10.0 * first.weight_norm, "weight norm did not grow");
    require(last.grad_norm < 1e-3 * first.grad_norm,
            "gradient norm only fell to " + fmt(last.grad_norm / first.grad_norm) + "x");
    require(last.robust_margins.minCoeff() > 0.0, "robust margins not positive at T");
    std::size_t burn = traj.checkpoints.size() / 3;
    for (std::size_t k = burn; k + 1 < traj.checkpoints.size(); ++k) {
      require(traj.checkpoints[k + 1].weight_norm > traj.checkpoints[k].weight_norm,
              "weight norm not increasing past burn-in");
      require(traj.checkpoints[k + 1].robust_margins.minCoeff() >
                  traj.checkpoints[k].robust_margins.minCoeff(),
              "min robust margin not increasing past burn-in");
    }
  });

  run("gd.s-sequence-increasing-with-rm-reference", [&] {
    auto [clean, truth] = generate_gaussian(20, 6, seed + 9, 0.5);
    const double bound = rm_existence_bound(clean);
    const Dataset d = assign_budgets(clean, BudgetScheme::uniform_random(0.0, 0.8 * bound, seed + 10));
    const MarginSolution rm = rm_solve(d);
    require(rm.status == SolverStatus::optimal, "rm solve failed");
    GDConfig cfg;
    cfg.step_size = 0.9 * max_step_size(spec, d);
    cfg.max_iters = opt.quick ? 20000 : 50000;
    const Trajectory traj = train(spec, d, cfg, rm.weights);
    const auto s = s_sequence(traj, rm.weights, cfg.step_size);
    for (std::size_t k = 0; k + 1 < s.size(); ++k)
      require(s[k + 1] > s[k], "s not increasing at checkpoint " + std::to_string(k));
  });

  run("gd.loss-monotone-below-bound", [&] {
    const Dataset d = random_dataset(25, 8, seed + 11, 0.4);
    GDConfig cfg;
    cfg.step_size = 0.9 * max_step_size(spec, d);
    cfg.max_iters = opt.quick ? 5000 : 20000;
    const Trajectory traj = train(spec, d, cfg);
    for (std::size_t k = 0; k + 1 < traj.checkpoints.size(); ++k)
      require(traj.checkpoints[k + 1].loss <= traj.checkpoints[k].loss + 1e-12,
              "loss increased between checkpoints");
  });

  run("margin.svm-matches-projected-gradient", [&] {
    std::mt19937_64 rng(seed + 12);
    std::uniform_real_distribution<double> pick_m(0.5, 3.0);
    for (int k = 0; k < (opt.quick ? 2 : 4); ++k) {
      const Dataset d = random_dataset(20, 6, seed + 400 + k, 0.0);
      Eigen::VectorXd m(d.n());
      for (Eigen::Index i = 0; i < d.n(); ++i) m[i] = pick_m(rng);
      const MarginSolution sol = solve_svm(d, m);
      require(sol.status == SolverStatus::optimal, "solve_svm not optimal");
      const double oracle = svm_norm_by_projected_gradient(d, m, 200000);
      require(std::abs(sol.objective_norm - oracle) <= 1e-6 * (1.0 + oracle),
              "norm " + fmt(sol.objective_norm) + " vs oracle " + fmt(oracle));
      const Eigen::VectorXd slack = d.labels.cwiseProduct(d.features * sol.weights) - m;
      for (Eigen::Index i = 0; i < d.n(); ++i)
        require(std::abs(sol.duals[i] * slack[i]) < 1e-6,
                "complementary slackness broken at i=" + std::to_string(i));
    }
  });

  run("margin.rm-certificates", [&] {
    for (int k = 0; k < (opt.quick ? 2 : 5); ++k) {
      auto [clean, truth] = generate_gaussian(30, 8, seed + 500 + k, 0.0);
      const double bound = rm_existence_bound(clean);
      const Dataset d =
          assign_budgets(clean, BudgetScheme::uniform_random(0.0, 0.8 * bound, seed + 600 + k));
      const MarginSolution rm = rm_solve(d);
      require(rm.status == SolverStatus::optimal, "rm not optimal");
      const double wn = rm.objective_norm;
      const Eigen::VectorXd slack = d.labels.cwiseProduct(d.features * rm.weights) -
                                    (1.0 + (d.budgets * wn).array()).matrix();
      require(slack.minCoeff() >= -1e-8 * (1.0 + wn), "feasibility slack " + fmt(slack.minCoeff()));
      require(kkt_residual(rm, d) < kKktTol, "kkt residual " + fmt(kkt_residual(rm, d)));
      require(theta(rm, d) > 1.0, "theta " + fmt(theta(rm, d)));
      const MarginSolution mm = max_margin(d);
      require(mm.objective_norm <= wn + 1e-9 &&
                  wn <= mm.objective_norm / (1.0 - d.budgets.maxCoeff() * mm.objective_norm) + 1e-9,
              "norm ordering broken");
      // Shrinking a minimal-norm solution must break some constraint.
      const Eigen::VectorXd shrunk = 0.999 * rm.weights;
      const Eigen::VectorXd s2 = d.labels.cwiseProduct(d.features * shrunk) -
                                 (1.0 + (d.budgets * shrunk.norm()).array()).matrix();
      require(s2.minCoeff() < 0.0, "0.999-shrink stayed feasible");
      // Dual-based and activity-based support sets agree.
      const auto active = support_vectors(rm, d);
      require(active == rm.support_set, "support sets disagree");
    }
  });

  run("margin.uniform-budget-consistency", [&] {
    for (int k = 0; k < (opt.quick ? 3 : 10); ++k) {
      auto [clean, truth] = generate_gaussian(50, 10, seed + 700 + k, 0.0);
      const MarginSolution mm = max_margin(clean);
      require(mm.status == SolverStatus::optimal, "mm failed");
      const double eps = 0.5 / mm.objective_norm;
      const Dataset d = assign_budgets(clean, BudgetScheme::uniform(eps));
      const MarginSolution rm = rm_solve(d);
      require(rm.status == SolverStatus::optimal, "rm failed");
      const Eigen::VectorXd closed = rm_uniform_closed_form(mm, eps);
      require((rm.weights - closed).norm() <= 1e-6 * closed.norm(),
              "rm_solve and closed form differ by " +
                  fmt((rm.weights - closed).norm() / closed.norm()));
    }
  });

  run("margin.existence-boundary", [&] {
    for (int k = 0; k < (opt.quick ? 2 : 5); ++k) {
      auto [clean, truth] = generate_gaussian(40, 8, seed + 800 + k, 0.0);
      const double bound = rm_existence_bound(clean);
      const Dataset feasible = assign_budgets(clean, BudgetScheme::uniform(0.99 * bound));
      require(rm_solve(feasible).status == SolverStatus::optimal, "0.99*bound infeasible");
      const Dataset boundary = assign_budgets(clean, BudgetScheme::uniform(bound));
      require(rm_solve(boundary).status == SolverStatus::infeasible, "bound not infeasible");
    }
  });

  run("margin.fixed-point-function-monotone", [&] {
    auto [clean, truth] = generate_gaussian(25, 6, seed + 13, 0.0);
    const double bound = rm_existence_bound(clean);
    const Dataset d = assign_budgets(clean, BudgetScheme::uniform_random(0.0, 0.7 * bound, seed + 14));
    const MarginSolution mm = max_margin(d);
    double prev = 0.0;
    for (int k = 0; k <= 8; ++k) {
      const double s = mm.objective_norm * (1.0 + 0.5 * k);
      const double g =
          solve_svm(d, (1.0 + s * d.budgets.array()).matrix()).objective_norm;
      require(g >= prev - 1e-9, "g(s) decreased");
      prev = g;
    }
  });

  run("margin.small-instance-direction-grid", [&] {
    for (int k = 0; k < (opt.quick ? 3 : 8); ++k) {
      auto [clean, truth] = generate_gaussian(3 + (k % 4), 2, seed + 900 + k, 1.0);
      const double bound = rm_existence_bound(clean);
      const Dataset d = assign_budgets(clean, BudgetScheme::uniform_random(0.0, 0.2 * bound, seed + 950 + k));
      const MarginSolution rm = rm_solve(d);
      require(rm.status == SolverStatus::optimal, "rm failed");
      const double grid = rm_norm_by_direction_grid(d, 1e-3);
      require(std::abs(rm.objective_norm - grid) <= 2e-3,
              "norm " + fmt(rm.objective_norm) + " vs grid " + fmt(grid));
    }
  });

  run("analysis.direction-distance-properties", [&] {
    std::mt19937_64 rng(seed + 15);
    for (int k = 0; k < 20; ++k) {
      const Eigen::VectorXd a = random_vector(7, rng), b = random_vector(7, rng);
      if (a.norm() == 0.0 || b.norm() == 0.0) continue;
      const double dab = direction_distance(a, b);
      require(std::abs(dab - direction_distance(b, a)) < 1e-15, "not symmetric");
      require(std::abs(dab - direction_distance(3.7 * a, 0.2 * b)) < 1e-12, "not scale invariant");
      const double cosab = a.dot(b) / (a.norm() * b.norm());
      require(std::abs(dab * dab - (2.0 - 2.0 * cosab)) < 1e-12, "law of cosines broken");
      require(dab >= 0.0 && dab <= 2.0, "out of range");
    }
  });

  run("analysis.generalization-error", [&] {
    std::mt19937_64 rng(seed + 16);
    for (int k = 0; k < (opt.quick ? 5 : 20); ++k) {
      Eigen::VectorXd wstar = random_vector(6, rng);
      wstar /= wstar.norm();
      const GroundTruth g{wstar};
      const Eigen::VectorXd w = random_vector(6, rng);
      const double exact = generalization_error(w, g);
      require(std::abs(exact - generalization_error(5.0 * w, g)) < 1e-15,
              "not scale invariant");
      const std::size_t samples = opt.quick ? 100000 : 1000000;
      const double mc = generalization_error_mc(w, g, samples, seed + 1000 + k);
      const double se = std::sqrt(std::max(mc * (1.0 - mc), 1e-12) / samples);
      require(std::abs(exact - mc) < 3.0 * se + 1e-12,
              "analytic " + fmt(exact) + " vs MC " + fmt(mc));
    }
  });

  run("analysis.log-rate-fit", [&] {
    Trajectory traj;
    traj.step_size = 1.0;
    for (std::size_t t = 100; t <= 100000; t = t * 3 / 2) {
      Checkpoint cp;
      cp.t = t;
      const double dist = 3.0 / std::log(static_cast<double>(t));
      // Place w_t at the stated direction distance from the target e1.
      Eigen::VectorXd w(2);
      const double c = 1.0 - dist * dist / 2.0;
      w << c, std::sqrt(std::max(0.0, 1.0 - c * c));
      cp.weights = w;
      traj.checkpoints.push_back(cp);
    }
    Eigen::VectorXd target(2);
    target << 1.0, 0.0;
    const ConvergenceFit fit = fit_log_rate(traj, target);
    require(std::abs(fit.coefficient - 3.0) < 1e-9, "coefficient " + fmt(fit.coefficient));
    require(fit.r_squared > 1.0 - 1e-9, "r^2 " + fmt(fit.r_squared));
  });

  run("analysis.aggregate-conventions", [&] {
    TrialRecord r;
    r.seed = 1;
    r.level = 0;
    r.eps = 0.3;
    r.status = "ok";
    r.ge_mm = 0.12;
    r.ge_rm = 0.10;
    auto single = aggregate({r});
    require(single.aggregates.size() == 1 && single.aggregates[0].ge_mm_se == 0.0 &&
                single.aggregates[0].ge_mm_mean == 0.12,
            "single-trial convention broken");
    auto dup = aggregate({r, r, r});
    require(dup.aggregates[0].ge_rm_se == 0.0 && dup.aggregates[0].ge_rm_mean == 0.10,
            "duplicate-trial convention broken");
  });

  return results;
}

}  // namespace robustmargin
