#include "robustmargin/margin_solvers.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include <json.hpp>

namespace robustmargin {

namespace {

constexpr double kPgTol = 1e-10;            // projected-gradient stop, scaled by 1+||w||
constexpr double kObjDivergence = 1e12;     // dual objective past this: infeasible
constexpr double kCertificateBound = 1e-6;  // recession certificate: ||w|| would exceed 1e6
constexpr int kMaxSweeps = 1000000;
constexpr double kFeasCheckTol = 1e-6;      // post-cap primal feasibility triage

struct DcaResult {
  Eigen::VectorXd alpha;
  Eigen::VectorXd w;
  SolverStatus status = SolverStatus::not_converged;
  int sweeps = 0;
};

// Dual coordinate ascent on max_{alpha >= 0} m^T alpha - 1/2 ||sum alpha_i y_i x_i||^2.
// Terminates when the largest projected gradient |PG_i| drops below
// kPgTol * (1 + ||w||); this pins primal feasibility violations well below the
// 1e-8 * (1 + ||w||) slack the diagnostics assert. Every 128 sweeps a
// Gordan-style recession certificate is tested so non-separable data is
// rejected long before the sweep cap.
DcaResult dual_coordinate_ascent(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                 const Eigen::VectorXd& m, Eigen::VectorXd alpha) {
  const Eigen::Index n = X.rows();
  const Eigen::Index p = X.cols();

  Eigen::VectorXd q(n);  // ||x_i||^2
  for (Eigen::Index i = 0; i < n; ++i) q[i] = X.row(i).squaredNorm();
  for (Eigen::Index i = 0; i < n; ++i)
    if (q[i] == 0.0 && m[i] > 0.0)
      return {Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(p),
              SolverStatus::infeasible, 0};

  if (alpha.size() != n) alpha = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd w = X.transpose() * alpha.cwiseProduct(y);

  DcaResult res;
  for (int sweep = 1; sweep <= kMaxSweeps; ++sweep) {
    double pg_max = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double g = m[i] - y[i] * X.row(i).dot(w);
      const double pg = alpha[i] > 0.0 ? g : std::max(g, 0.0);
      pg_max = std::max(pg_max, std::abs(pg));
      const double next = std::max(0.0, alpha[i] + g / q[i]);
      const double delta = next - alpha[i];
      if (delta != 0.0) {
        alpha[i] = next;
        w += (delta * y[i]) * X.row(i).transpose();
      }
    }
    res.sweeps = sweep;
    if (pg_max <= kPgTol * (1.0 + w.norm())) {
      res.status = SolverStatus::optimal;
      break;
    }
    if (sweep % 128 == 0) {
      const double dual_obj = m.dot(alpha) - 0.5 * w.squaredNorm();
      if (dual_obj > kObjDivergence) {
        res.status = SolverStatus::infeasible;
        break;
      }
      // alpha/||alpha||_1 approaches a recession direction d >= 0 with
      // sum d_i y_i x_i = 0 on infeasible data; then m^T d = 1 forces
      // ||w|| >= 1 / ||sum d_i y_i x_i||.
      const double md = m.dot(alpha);
      if (md > 0.0) {
        const double nu = (X.transpose() * alpha.cwiseProduct(y)).norm() / md;
        if (nu < kCertificateBound) {
          res.status = SolverStatus::infeasible;
          break;
        }
      }
    }
  }

  // Remove incremental-update drift before packaging.
  w = X.transpose() * alpha.cwiseProduct(y);

  if (res.status == SolverStatus::not_converged) {
    const double slack =
        (y.cwiseProduct(X * w) - m).minCoeff() / (1.0 + w.norm());
    if (slack < -kFeasCheckTol) res.status = SolverStatus::infeasible;
  }
  res.alpha = std::move(alpha);
  res.w = std::move(w);
  return res;
}

MarginSolution package(DcaResult&& r) {
  MarginSolution sol;
  sol.status = r.status;
  sol.sweeps = r.sweeps;
  if (r.status == SolverStatus::infeasible) return sol;
  sol.weights = std::move(r.w);
  sol.duals = std::move(r.alpha);
  sol.objective_norm = sol.weights.norm();
  for (Eigen::Index i = 0; i < sol.duals.size(); ++i)
    if (sol.duals[i] > kDualTol) sol.support_set.push_back(i);
  return sol;
}

}  // namespace

std::string to_string(SolverStatus s) {
  switch (s) {
    case SolverStatus::optimal: return "optimal";
    case SolverStatus::infeasible: return "infeasible";
    case SolverStatus::not_converged: return "not_converged";
  }
  return "unknown";
}

MarginSolution solve_svm(const Dataset& d, const Eigen::VectorXd& margins) {
  d.validate();
  if (margins.size() != d.n()) throw std::invalid_argument("solve_svm: margins length != n");
  if (margins.minCoeff() <= 0.0) throw std::invalid_argument("solve_svm: margins must be > 0");
  return package(dual_coordinate_ascent(d.features, d.labels, margins, {}));
}

MarginSolution max_margin(const Dataset& d) {
  d.validate();
  return solve_svm(d, Eigen::VectorXd::Ones(d.n()));
}

double rm_existence_bound(const Dataset& d) {
  const MarginSolution mm = max_margin(d);
  if (mm.status != SolverStatus::optimal)
    throw InfeasibleError("rm_existence_bound: dataset is not linearly separable");
  return 1.0 / mm.objective_norm;
}

Eigen::VectorXd rm_uniform_closed_form(const MarginSolution& wM, double eps) {
  if (wM.status != SolverStatus::optimal)
    throw std::invalid_argument("rm_uniform_closed_form: need an optimal max-margin solution");
  if (eps < 0.0) throw std::invalid_argument("rm_uniform_closed_form: eps >= 0");
  const double denom = 1.0 - eps * wM.objective_norm;
  if (denom <= 0.0)
    throw InfeasibleError("rm_uniform_closed_form: eps * ||w_M|| >= 1, no robust classifier");
  return wM.weights / denom;
}

MarginSolution rm_solve(const Dataset& d) {
  d.validate();
  const MarginSolution mm = max_margin(d);
  if (mm.status != SolverStatus::optimal) {
    MarginSolution sol;
    sol.status = mm.status;
    return sol;
  }

  const double wm_norm = mm.objective_norm;
  const double eps_inf = d.budgets.maxCoeff();
  if (eps_inf * wm_norm >= 1.0 - 1e-9) {
    MarginSolution sol;
    sol.status = SolverStatus::infeasible;
    return sol;
  }

  const double fp_tol = 1e-10 * (1.0 + wm_norm);
  const double lo0 = wm_norm;
  // With uniform budgets the fixed point sits exactly on the certified top of
  // the bracket; inflate it so the root lies strictly inside. h(s) decreases
  // past the fixed point, so the inflated end still has h <= 0.
  const double hi0 = (wm_norm / (1.0 - eps_inf * wm_norm)) * (1.0 + 1e-6);

  Eigen::VectorXd warm;  // carried across bisection points
  bool inner_converged = true;
  auto solve_at = [&](double s) {
    DcaResult r = dual_coordinate_ascent(d.features, d.labels,
                                         (1.0 + s * d.budgets.array()).matrix(), warm);
    if (r.status == SolverStatus::optimal) warm = r.alpha;
    else inner_converged = false;
    return r;
  };

  auto norm_of = [](const DcaResult& r) { return r.w.norm(); };
  auto bail = [](SolverStatus status) {
    MarginSolution sol;
    sol.status = status;
    return sol;
  };

  DcaResult at_lo = solve_at(lo0);
  // The data is separable, so an infeasible inner program is solver trouble.
  if (at_lo.status == SolverStatus::infeasible) return bail(SolverStatus::not_converged);
  double h_lo = norm_of(at_lo) - lo0;

  DcaResult chosen;
  if (std::abs(h_lo) <= fp_tol) {
    chosen = std::move(at_lo);
  } else {
    DcaResult at_hi = solve_at(hi0);
    if (at_hi.status == SolverStatus::infeasible) return bail(SolverStatus::not_converged);
    const double h_hi = norm_of(at_hi) - hi0;
    if (h_lo < 0.0 || h_hi > fp_tol) return bail(SolverStatus::infeasible);
    double lo = lo0, hi = hi0;
    chosen = std::move(at_hi);
    bool converged = std::abs(h_hi) <= fp_tol;
    for (int it = 0; it < 200 && !converged; ++it) {
      const double mid = 0.5 * (lo + hi);
      DcaResult at_mid = solve_at(mid);
      if (at_mid.status == SolverStatus::infeasible) return bail(SolverStatus::not_converged);
      const double h_mid = norm_of(at_mid) - mid;
      chosen = std::move(at_mid);
      // |h| <= fp_tol certifies the fixed point directly; a bracket narrower
      // than fp_tol certifies |s - s*| <= fp_tol even when solver noise in
      // g(s) keeps |h| above the threshold.
      if (std::abs(h_mid) <= fp_tol || hi - lo <= fp_tol) {
        converged = true;
        break;
      }
      if (h_mid > 0.0) lo = mid;
      else hi = mid;
    }
    if (!converged) return bail(SolverStatus::not_converged);
  }

  MarginSolution sol = package(std::move(chosen));
  if (!inner_converged && sol.status == SolverStatus::optimal)
    sol.status = SolverStatus::not_converged;
  if (sol.status != SolverStatus::optimal) return sol;

  // Re-express the inner-QP duals in the robust stationarity form
  // w = sum alpha_i (y_i x_i - eps_i w/||w||): scale by ||w||^2 / sum(alpha).
  const double total = sol.duals.sum();
  if (total > 0.0) {
    sol.duals *= sol.objective_norm * sol.objective_norm / total;
    sol.support_set.clear();
    for (Eigen::Index i = 0; i < sol.duals.size(); ++i)
      if (sol.duals[i] > kDualTol) sol.support_set.push_back(i);
  }
  return sol;
}

std::vector<Eigen::Index> support_vectors(const MarginSolution& sol, const Dataset& d,
                                          double tol) {
  if (sol.status != SolverStatus::optimal)
    throw std::invalid_argument("support_vectors: solution is not optimal");
  const double wn = sol.weights.norm();
  const Eigen::VectorXd lhs = d.labels.cwiseProduct(d.features * sol.weights);
  std::vector<Eigen::Index> s;
  for (Eigen::Index i = 0; i < d.n(); ++i)
    if (std::abs(lhs[i] - (1.0 + d.budgets[i] * wn)) <= tol * (1.0 + wn))
      s.push_back(i);
  return s;
}

double kkt_residual(const MarginSolution& sol, const Dataset& d) {
  if (sol.status != SolverStatus::optimal)
    throw std::invalid_argument("kkt_residual: solution is not optimal");
  if (sol.duals.size() != d.n() || sol.weights.size() != d.p())
    throw std::invalid_argument("kkt_residual: solution does not match the dataset");
  const double wn = sol.weights.norm();
  Eigen::VectorXd recon = d.features.transpose() * sol.duals.cwiseProduct(d.labels);
  if (wn > 0.0) recon -= (sol.duals.dot(d.budgets) / wn) * sol.weights;
  return (sol.weights - recon).norm() / (1.0 + wn);
}

double theta(const MarginSolution& sol, const Dataset& d) {
  if (sol.status != SolverStatus::optimal)
    throw std::invalid_argument("theta: solution is not optimal");
  const auto support = support_vectors(sol, d);
  const double wn = sol.weights.norm();
  const Eigen::VectorXd margins =
      d.labels.cwiseProduct(d.features * sol.weights) - d.budgets * wn;
  double best = std::numeric_limits<double>::infinity();
  std::size_t si = 0;
  for (Eigen::Index i = 0; i < d.n(); ++i) {
    if (si < support.size() && support[si] == i) {
      ++si;
      continue;
    }
    best = std::min(best, margins[i]);
  }
  return best;
}

void save_solution_json(const MarginSolution& sol, const std::string& path) {
  nlohmann::json j;
  j["status"] = to_string(sol.status);
  j["weights"] = std::vector<double>(sol.weights.begin(), sol.weights.end());
  j["duals"] = std::vector<double>(sol.duals.begin(), sol.duals.end());
  j["support"] = sol.support_set;
  j["objective_norm"] = sol.objective_norm;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << j.dump(2) << "\n";
}

MarginSolution load_solution_json(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  nlohmann::json j;
  in >> j;
  MarginSolution sol;
  const std::string status = j.at("status").get<std::string>();
  if (status == "optimal") sol.status = SolverStatus::optimal;
  else if (status == "infeasible") sol.status = SolverStatus::infeasible;
  else sol.status = SolverStatus::not_converged;
  const auto& wv = j.at("weights");
  sol.weights.resize(static_cast<Eigen::Index>(wv.size()));
  for (std::size_t i = 0; i < wv.size(); ++i)
    sol.weights[static_cast<Eigen::Index>(i)] = wv[i].get<double>();
  if (j.contains("duals")) {
    const auto& dv = j["duals"];
    sol.duals.resize(static_cast<Eigen::Index>(dv.size()));
    for (std::size_t i = 0; i < dv.size(); ++i)
      sol.duals[static_cast<Eigen::Index>(i)] = dv[i].get<double>();
  }
  if (j.contains("support"))
    sol.support_set = j["support"].get<std::vector<Eigen::Index>>();
  sol.objective_norm = j.value("objective_norm", sol.weights.norm());
  return sol;
}

}  // namespace robustmargin
