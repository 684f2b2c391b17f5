#include "robustmargin/cli_app.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "robustmargin/analysis.hpp"
#include "robustmargin/checks.hpp"
#include "robustmargin/dataset.hpp"
#include "robustmargin/experiments.hpp"
#include "robustmargin/gd_trainer.hpp"
#include "robustmargin/loss.hpp"
#include "robustmargin/margin_solvers.hpp"
#include "robustmargin/version.hpp"

namespace robustmargin {

namespace {

using nlohmann::json;

void write_text(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << contents;
  if (!out) throw std::runtime_error("write failed: " + path);
}

void write_json(const std::string& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

json solution_to_json(const MarginSolution& sol) {
  json j;
  j["status"] = to_string(sol.status);
  j["weights"] = std::vector<double>(sol.weights.begin(), sol.weights.end());
  j["duals"] = std::vector<double>(sol.duals.begin(), sol.duals.end());
  j["support"] = sol.support_set;
  j["objective_norm"] = sol.objective_norm;
  return j;
}

// Splits "fraction:0.4:0.3" style scheme strings.
BudgetScheme parse_scheme(const std::string& text, std::uint64_t seed) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ':')) parts.push_back(item);
  auto num = [&](std::size_t i) {
    std::size_t used = 0;
    const double v = std::stod(parts.at(i), &used);
    if (used != parts.at(i).size()) throw CLI::ValidationError("--eps-scheme", "bad number");
    return v;
  };
  if (parts.empty()) throw CLI::ValidationError("--eps-scheme", "empty scheme");
  if (parts[0] == "uniform" && parts.size() == 2) return BudgetScheme::uniform(num(1));
  if (parts[0] == "fraction" && parts.size() == 3)
    return BudgetScheme::fraction(num(1), num(2), seed);
  if ((parts[0] == "random" || parts[0] == "uniform_random") && parts.size() == 3)
    return BudgetScheme::uniform_random(num(1), num(2), seed);
  throw CLI::ValidationError(
      "--eps-scheme", "expected uniform:EPS, fraction:Q:EPS or random:LO:HI, got '" + text + "'");
}

// --config FILE: JSON keys become long-option tokens injected ahead of the
// explicit flags, so the command line wins on conflicts.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  auto it = std::find(args.begin(), args.end(), "--config");
  if (it == args.end()) return args;
  if (std::next(it) == args.end())
    throw std::invalid_argument("--config requires a file path");
  std::ifstream in(*std::next(it));
  if (!in) throw std::runtime_error("cannot open for reading: " + *std::next(it));
  json j;
  in >> j;
  if (!j.is_object()) throw std::invalid_argument("--config file must hold a JSON object");

  std::vector<std::string> out(args.begin(), it);  // tokens before --config
  std::vector<std::string> tail(std::next(it, 2), args.end());
  for (const auto& [key, value] : j.items()) {
    if (value.is_boolean()) {
      if (value.get<bool>()) out.push_back("--" + key);
      continue;
    }
    out.push_back("--" + key);
    out.push_back(value.is_string() ? value.get<std::string>() : value.dump());
  }
  out.insert(out.end(), tail.begin(), tail.end());
  return out;
}

void allow_overrides(CLI::App& cmd) {
  for (auto* opt : cmd.get_options())
    if (opt->get_expected_min() > 0) opt->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
}

int map_exception(const std::exception& e) {
  std::cerr << "error: " << e.what() << "\n";
  return kExitCheckFailed;
}

struct GenDataArgs {
  std::uint64_t n = 100, p = 2, seed = 1;
  double min_margin = 0.0;
  std::string eps_scheme;
  std::uint64_t eps_seed = 0;
  bool eps_seed_set = false;
  bool apply_shift = false;
  std::string out, truth_out;
};

int cmd_gen_data(const GenDataArgs& a) {
  auto [d, truth] = generate_gaussian(static_cast<Eigen::Index>(a.n),
                                      static_cast<Eigen::Index>(a.p), a.seed, a.min_margin);
  const std::uint64_t eps_seed = a.eps_seed_set ? a.eps_seed : a.seed;
  if (!a.eps_scheme.empty()) d = assign_budgets(d, parse_scheme(a.eps_scheme, eps_seed));
  if (a.apply_shift) d = apply_adversarial_shift(d, truth);
  save_csv(d, a.out);

  json cfg{{"command", "gen-data"}, {"n", a.n},
           {"p", a.p},              {"seed", a.seed},
           {"min_margin", a.min_margin}, {"eps_scheme", a.eps_scheme},
           {"eps_seed", eps_seed},  {"apply_shift", a.apply_shift},
           {"out", a.out}};
  json j{{"true_weights",
          std::vector<double>(truth.true_weights.begin(), truth.true_weights.end())},
         {"config", cfg},
         {"version", kVersion}};
  const std::string truth_path =
      a.truth_out.empty() ? a.out + ".truth.json" : a.truth_out;
  write_json(truth_path, j);
  std::cout << "wrote " << a.out << " (" << a.n << " samples, p=" << a.p << ") and "
            << truth_path << "\n";
  return kExitOk;
}

struct TrainArgs {
  std::string data, eta = "auto", out = "trajectory.csv", weights_out, reference,
              weights_dump;
  std::uint64_t iters = 100000;
  double checkpoint_ratio = 1.3;
};

int cmd_train(const TrainArgs& a) {
  const Dataset d = load_csv(a.data);
  const LossSpec spec = logistic();

  double eta = 0.0;
  if (a.eta == "auto") {
    eta = 0.9 * max_step_size(spec, d);
  } else {
    std::size_t used = 0;
    eta = std::stod(a.eta, &used);
    if (used != a.eta.size() || eta <= 0.0)
      throw std::invalid_argument("--eta must be 'auto' or a positive number");
  }

  GDConfig cfg;
  cfg.step_size = eta;
  cfg.max_iters = a.iters;
  cfg.checkpoint_schedule = geometric_checkpoints(a.iters, a.checkpoint_ratio);

  std::optional<Eigen::VectorXd> reference;
  if (!a.reference.empty()) {
    const MarginSolution ref = load_solution_json(a.reference);
    reference = ref.weights;
  }

  const Trajectory traj = train(spec, d, cfg, reference);
  save_trajectory_csv(traj, a.out);
  if (!a.weights_dump.empty()) save_trajectory_weights_csv(traj, a.weights_dump);

  const Checkpoint& last = traj.checkpoints.back();
  json cfgj{{"command", "train"},       {"data", a.data},
            {"eta", eta},               {"eta_arg", a.eta},
            {"iters", a.iters},         {"checkpoint_ratio", a.checkpoint_ratio},
            {"reference", a.reference}, {"out", a.out}};
  json j{{"weights", std::vector<double>(last.weights.begin(), last.weights.end())},
         {"final_loss", last.loss},
         {"final_grad_norm", last.grad_norm},
         {"final_weight_norm", last.weight_norm},
         {"min_robust_margin", last.robust_margins.minCoeff()},
         {"config", cfgj},
         {"version", kVersion}};
  const std::string wpath = a.weights_out.empty() ? a.out + ".weights.json" : a.weights_out;
  write_json(wpath, j);

  std::cout << "final grad_norm = " << last.grad_norm
            << ", min robust margin = " << last.robust_margins.minCoeff()
            << ", ||w_T|| = " << last.weight_norm << "\n";
  return kExitOk;
}

struct SolveArgs {
  std::string data, which = "rm", out = "solution.json";
};

int cmd_solve(const SolveArgs& a) {
  Dataset d = load_csv(a.data);
  const MarginSolution mm = max_margin(d);
  const double bound =
      mm.status == SolverStatus::optimal ? 1.0 / mm.objective_norm : 0.0;

  MarginSolution sol;
  Dataset scored = d;
  if (a.which == "mm") {
    sol = mm;
    scored.budgets.setZero();  // the plain program ignores budgets
  } else if (a.which == "rm") {
    sol = rm_solve(d);
  } else {
    throw std::invalid_argument("--which must be mm or rm");
  }

  json j = solution_to_json(sol);
  j["which"] = a.which;
  j["existence_bound"] = bound;
  j["config"] = json{{"command", "solve"}, {"data", a.data}, {"which", a.which}, {"out", a.out}};
  j["version"] = kVersion;

  if (sol.status != SolverStatus::optimal) {
    write_json(a.out, j);
    std::cout << "status = " << to_string(sol.status) << ", existence bound = " << bound
              << "\n";
    return sol.status == SolverStatus::infeasible ? kExitInfeasible : kExitCheckFailed;
  }

  const double kkt = kkt_residual(sol, scored);
  const double th = theta(sol, scored);
  j["kkt_residual"] = kkt;
  j["theta"] = th;
  write_json(a.out, j);
  std::cout << "||w|| = " << sol.objective_norm << ", |S| = " << sol.support_set.size()
            << ", kkt_residual = " << kkt << ", theta = " << th
            << ", existence bound = " << bound << "\n";
  return kExitOk;
}

struct Fig1Args {
  Fig1Config cfg;
  std::string out = "fig1.csv", trials_out, summary;
  std::string shift_mode = "away";
  bool no_shift = false;
};

int cmd_fig1(Fig1Args a) {
  if (a.no_shift) a.shift_mode = "none";
  if (a.shift_mode == "none") a.cfg.shift_mode = ShiftMode::none;
  else if (a.shift_mode == "toward") a.cfg.shift_mode = ShiftMode::toward;
  else if (a.shift_mode == "away") a.cfg.shift_mode = ShiftMode::away;
  else throw std::invalid_argument("--shift-mode must be away, toward or none");
  const ExperimentReport report = run_fig1(a.cfg);
  save_report_aggregate_csv(report, a.out);
  const std::string trials_path =
      a.trials_out.empty() ? a.out + ".trials.csv" : a.trials_out;
  save_report_trials_csv(report, trials_path);

  json cfgj{{"command", "fig1"},
            {"trials", a.cfg.trials},
            {"n", a.cfg.n},
            {"p", a.cfg.p},
            {"levels", a.cfg.levels},
            {"q", a.cfg.q},
            {"grid_cap", a.cfg.grid_cap},
            {"seed", a.cfg.seed0},
            {"min_margin", a.cfg.min_margin},
            {"shift_mode", to_string(a.cfg.shift_mode)},
            {"test_perturbed", a.cfg.test_perturbed},
            {"out", a.out}};
  json j{{"config", cfgj}, {"version", kVersion}, {"levels", json::array()}};
  for (const auto& agg : report.aggregates) {
    j["levels"].push_back(json{{"level", agg.level},
                               {"eps_mean", agg.eps_mean},
                               {"ge_mm_mean", agg.ge_mm_mean},
                               {"ge_mm_se", agg.ge_mm_se},
                               {"ge_rm_mean", agg.ge_rm_mean},
                               {"ge_rm_se", agg.ge_rm_se},
                               {"trials_used", agg.trials_used},
                               {"trials_excluded", agg.trials_excluded}});
  }
  const std::string summary_path = a.summary.empty() ? a.out + ".summary.json" : a.summary;
  write_json(summary_path, j);

  int excluded = 0;
  for (const auto& agg : report.aggregates) excluded += agg.trials_excluded;
  std::cout << "wrote " << a.out << " and " << trials_path << " (" << report.trials.size()
            << " rows, " << excluded << " excluded)\n";
  return kExitOk;
}

struct Fig2Args {
  Fig2Config cfg;
  int runs = 1;
  std::string out = "fig2.csv", summary;
};

int cmd_fig2(const Fig2Args& a) {
  std::vector<Fig2Result> results;
  json per_seed = json::array();
  for (int r = 0; r < a.runs; ++r) {
    Fig2Config cfg = a.cfg;
    cfg.seed = a.cfg.seed + static_cast<std::uint64_t>(r);
    Fig2Result res = run_fig2(cfg);
    std::cout << "seed " << cfg.seed << ": mm-vs-rm direction gap = " << res.direction_gap
              << ", final dist to RM = " << res.dist_rm.back()
              << ", fit a = " << res.fit.coefficient << " (R^2 = " << res.fit.r_squared
              << ")\n";
    per_seed.push_back(json{{"seed", cfg.seed},
                            {"eta", res.eta},
                            {"direction_gap", res.direction_gap},
                            {"final_dist_rm", res.dist_rm.back()},
                            {"final_dist_mm", res.dist_mm.back()},
                            {"fit_coefficient", res.fit.coefficient},
                            {"fit_r_squared", res.fit.r_squared},
                            {"fit_checkpoints_used", res.fit.checkpoints_used}});
    results.push_back(std::move(res));
  }
  save_fig2_curves_csv(results, a.out);

  json cfgj{{"command", "fig2"}, {"seed", a.cfg.seed},   {"runs", a.runs},
            {"n", a.cfg.n},      {"p", a.cfg.p},         {"iters", a.cfg.iters},
            {"eta_factor", a.cfg.eta_factor}, {"min_margin", a.cfg.min_margin},
            {"out", a.out}};
  const std::string summary_path = a.summary.empty() ? a.out + ".summary.json" : a.summary;
  write_json(summary_path, json{{"config", cfgj}, {"version", kVersion}, {"runs", per_seed}});
  return kExitOk;
}

int cmd_check(bool quick, std::uint64_t seed) {
  CheckOptions opt;
  opt.quick = quick;
  opt.seed = seed;
  const auto results = run_all_checks(opt);
  std::size_t width = 0;
  for (const auto& r : results) width = std::max(width, r.name.size());
  int failures = 0;
  for (const auto& r : results) {
    std::printf("%-*s %s (%.2fs)%s%s\n", static_cast<int>(width), r.name.c_str(),
                r.passed ? "PASS" : "FAIL", r.seconds, r.passed ? "" : " -- ",
                r.passed ? "" : r.detail.c_str());
    if (!r.passed) ++failures;
  }
  if (failures > 0) {
    std::printf("%d of %zu checks failed\n", failures, results.size());
    return kExitCheckFailed;
  }
  std::printf("all %zu checks passed\n", results.size());
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& raw_args) {
  CLI::App app{"Adversarially robust binary linear classification toolkit"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  GenDataArgs gen;
  auto* cgen = app.add_subcommand("gen-data", "Generate a synthetic Gaussian dataset");
  cgen->add_option("--n", gen.n, "Number of samples")->check(CLI::PositiveNumber);
  cgen->add_option("--p", gen.p, "Feature dimension")->check(CLI::PositiveNumber);
  cgen->add_option("--seed", gen.seed, "Generation seed");
  cgen->add_option("--min-margin", gen.min_margin, "Rejection margin for |x^T w*|");
  cgen->add_option("--eps-scheme", gen.eps_scheme,
                   "uniform:EPS | fraction:Q:EPS | random:LO:HI");
  cgen->add_option("--eps-seed", gen.eps_seed, "Seed for budget assignment (default: --seed)")
      ->each([&](const std::string&) { gen.eps_seed_set = true; });
  cgen->add_flag("--apply-shift", gen.apply_shift,
                 "Apply the worst-case feature shift against w*");
  cgen->add_option("--out", gen.out, "Dataset CSV path")->required();
  cgen->add_option("--truth-out", gen.truth_out, "Ground-truth JSON path");

  TrainArgs tr;
  auto* ctrain = app.add_subcommand("train", "Gradient descent on the robust loss");
  ctrain->add_option("--data", tr.data, "Dataset CSV")->required();
  ctrain->add_option("--eta", tr.eta, "Step size, or 'auto' for 0.9x the stability bound");
  ctrain->add_option("--iters", tr.iters, "Iteration count");
  ctrain->add_option("--checkpoint-ratio", tr.checkpoint_ratio, "Geometric spacing ratio");
  ctrain->add_option("--out", tr.out, "Trajectory CSV path");
  ctrain->add_option("--weights-out", tr.weights_out, "Final-weights JSON path");
  ctrain->add_option("--reference", tr.reference,
                     "Solution JSON whose weights anchor the s-sequence");
  ctrain->add_option("--weights-dump", tr.weights_dump, "Per-checkpoint weight CSV");

  SolveArgs so;
  auto* csolve = app.add_subcommand("solve", "Solve a margin program");
  csolve->add_option("--data", so.data, "Dataset CSV")->required();
  csolve->add_option("--which", so.which, "mm | rm")
      ->check(CLI::IsMember({"mm", "rm"}));
  csolve->add_option("--out", so.out, "Solution JSON path");

  Fig1Args f1;
  auto* cfig1 = app.add_subcommand("fig1", "Generalization-error sweep over budgets");
  cfig1->add_option("--trials", f1.cfg.trials, "Independent trials")->check(CLI::PositiveNumber);
  cfig1->add_option("--n", f1.cfg.n, "Samples per trial");
  cfig1->add_option("--p", f1.cfg.p, "Feature dimension");
  cfig1->add_option("--levels", f1.cfg.levels, "Budget levels on the grid");
  cfig1->add_option("--q", f1.cfg.q, "Perturbed fraction of samples");
  cfig1->add_option("--grid-cap", f1.cfg.grid_cap, "Top level as a fraction of 1/||w_M||");
  cfig1->add_option("--seed", f1.cfg.seed0, "First trial seed");
  cfig1->add_option("--min-margin", f1.cfg.min_margin, "Generator rejection margin");
  cfig1->add_option("--shift-mode", f1.shift_mode,
                    "How budgets are realized in the features: away | toward | none")
      ->check(CLI::IsMember({"away", "toward", "none"}));
  cfig1->add_flag("--no-shift", f1.no_shift, "Shorthand for --shift-mode none");
  cfig1->add_flag("--test-perturbed", f1.cfg.test_perturbed,
                  "Score on worst-case-shifted test points (Monte Carlo)");
  cfig1->add_option("--mc-samples", f1.cfg.mc_samples, "Monte Carlo samples per estimate");
  cfig1->add_option("--threads", f1.cfg.threads, "Worker pool cap (0 = auto)");
  cfig1->add_option("--out", f1.out, "Aggregate CSV path");
  cfig1->add_option("--trials-out", f1.trials_out, "Per-trial CSV path");
  cfig1->add_option("--summary", f1.summary, "Summary JSON path");

  Fig2Args f2;
  auto* cfig2 = app.add_subcommand("fig2", "Directional convergence of GD to the RM classifier");
  cfig2->add_option("--seed", f2.cfg.seed, "First instance seed");
  cfig2->add_option("--runs", f2.runs, "Number of seeds")->check(CLI::PositiveNumber);
  cfig2->add_option("--n", f2.cfg.n, "Samples");
  cfig2->add_option("--p", f2.cfg.p, "Feature dimension");
  cfig2->add_option("--iters", f2.cfg.iters, "GD iterations");
  cfig2->add_option("--eta-factor", f2.cfg.eta_factor, "Step size as a fraction of the bound");
  cfig2->add_option("--min-margin", f2.cfg.min_margin, "Generator rejection margin");
  cfig2->add_option("--out", f2.out, "Curves CSV path");
  cfig2->add_option("--summary", f2.summary, "Summary JSON path");

  bool quick = false;
  std::uint64_t check_seed = 1;
  auto* ccheck = app.add_subcommand("check", "Run the invariant suite");
  ccheck->add_flag("--quick", quick, "Reduced horizons; finishes in well under a minute");
  ccheck->add_option("--seed", check_seed, "Base seed for the random instances");

  try {
    std::vector<std::string> args = expand_config(raw_args);
    for (auto* sub : app.get_subcommands({})) allow_overrides(*sub);
    // CLI11 consumes tokens in reverse.
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);

    if (*cgen) return cmd_gen_data(gen);
    if (*ctrain) return cmd_train(tr);
    if (*csolve) return cmd_solve(so);
    if (*cfig1) return cmd_fig1(f1);
    if (*cfig2) return cmd_fig2(f2);
    if (*ccheck) return cmd_check(quick, check_seed);
    return kExitCheckFailed;
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitCheckFailed;
  } catch (const DivergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDivergence;
  } catch (const InfeasibleError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitCheckFailed;
  } catch (const std::ios_base::failure& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::runtime_error& e) {
    // I/O-flavored failures (missing/unwritable files) land here.
    const std::string what = e.what();
    std::cerr << "error: " << what << "\n";
    if (what.find("cannot open") != std::string::npos ||
        what.find("write failed") != std::string::npos)
      return kExitIo;
    return kExitCheckFailed;
  } catch (const std::exception& e) {
    return map_exception(e);
  }
}

}  // namespace robustmargin
