#include "robustmargin/loss.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace robustmargin {

namespace {

// log(1 + exp(-u)) without overflow: trajectories reach margins beyond 500
// where the naive form under/overflows.
double logistic_value(double u) {
  if (u >= 0.0) return std::log1p(std::exp(-u));
  return -u + std::log1p(std::exp(u));
}

// l'(u) = -1 / (1 + exp(u)), evaluated from the negative exponent side.
double logistic_d1(double u) {
  if (u >= 0.0) {
    const double e = std::exp(-u);
    return -e / (1.0 + e);
  }
  return -1.0 / (1.0 + std::exp(u));
}

// l''(u) = sigma(u) * (1 - sigma(u)).
double logistic_d2(double u) {
  const double e = std::exp(-std::abs(u));
  const double s = e / (1.0 + e);
  return s * (1.0 - s);
}

}  // namespace

LossSpec logistic() {
  LossSpec spec;
  spec.name = "logistic";
  spec.value = logistic_value;
  spec.first_derivative = logistic_d1;
  spec.second_derivative = logistic_d2;
  spec.smoothness = 1.0;
  spec.tail = TailParams{1.0, 1.0, 1.0, 1.0};
  return spec;
}

Eigen::VectorXd robust_margins(const Dataset& d, const Eigen::VectorXd& w) {
  if (w.size() != d.p()) throw std::invalid_argument("robust_margins: dimension mismatch");
  return d.labels.cwiseProduct(d.features * w) - d.budgets * w.norm();
}

double robust_loss(const LossSpec& spec, const Dataset& d, const Eigen::VectorXd& w) {
  const Eigen::VectorXd m = robust_margins(d, w);
  double total = 0.0;
  for (Eigen::Index i = 0; i < m.size(); ++i) total += spec.value(m[i]);
  return total;
}

Eigen::VectorXd robust_loss_gradient(const LossSpec& spec, const Dataset& d,
                                     const Eigen::VectorXd& w) {
  if (w.size() != d.p())
    throw std::invalid_argument("robust_loss_gradient: dimension mismatch");
  const double wn = w.norm();
  const bool any_budget = d.budgets.maxCoeff() > 0.0;
  if (any_budget && wn < 1e-12)
    throw std::domain_error("robust_loss_gradient: not differentiable at w = 0");

  const Eigen::VectorXd m = d.labels.cwiseProduct(d.features * w) - d.budgets * wn;
  Eigen::VectorXd lp(m.size());
  for (Eigen::Index i = 0; i < m.size(); ++i) lp[i] = spec.first_derivative(m[i]);

  Eigen::VectorXd grad = d.features.transpose() * lp.cwiseProduct(d.labels);
  if (any_budget) grad -= (lp.dot(d.budgets) / wn) * w;
  return grad;
}

double inner_max_oracle(const LossSpec& spec, const Eigen::VectorXd& x, double y,
                        double eps, const Eigen::VectorXd& w, std::size_t trials,
                        std::uint64_t seed) {
  if (trials < 1) throw std::invalid_argument("inner_max_oracle: trials >= 1");
  if (x.size() != w.size()) throw std::invalid_argument("inner_max_oracle: dimension mismatch");
  if (eps < 0.0) throw std::invalid_argument("inner_max_oracle: eps >= 0");

  const double base = y * x.dot(w);
  const double wn = w.norm();
  double best = spec.value(base);                            // z = 0
  if (wn > 0.0) best = std::max(best, spec.value(base - eps * wn));  // analytic candidate

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd z(x.size());
  for (std::size_t k = 0; k < trials; ++k) {
    for (Eigen::Index j = 0; j < z.size(); ++j) z[j] = normal(rng);
    const double zn = z.norm();
    if (zn == 0.0) continue;
    best = std::max(best, spec.value(base + y * (eps / zn) * z.dot(w)));
  }
  return best;
}

double spectral_norm(const Eigen::MatrixXd& X) {
  if (X.rows() == 0 || X.cols() == 0) return 0.0;
  Eigen::VectorXd v(X.cols());
  for (Eigen::Index j = 0; j < v.size(); ++j)
    v[j] = 1.0 + 1e-3 * static_cast<double>(j);  // deterministic, not axis-aligned
  v /= v.norm();

  double sigma = 0.0;
  for (int it = 0; it < 10000; ++it) {
    const Eigen::VectorXd xv = X * v;
    const double next = xv.norm();  // = sqrt(v^T X^T X v) for unit v
    if (next == 0.0) return 0.0;
    const Eigen::VectorXd u = X.transpose() * xv;
    const double un = u.norm();
    if (un == 0.0) return next;
    v = u / un;
    if (it > 0 && std::abs(next - sigma) <= 1e-10 * next) return next;
    sigma = next;
  }
  return sigma;
}

double max_step_size(const LossSpec& spec, const Dataset& d) {
  d.validate();
  const double scale = spectral_norm(d.features) + d.budgets.norm();
  if (scale == 0.0 || spec.smoothness <= 0.0)
    return std::numeric_limits<double>::infinity();
  return 2.0 / (spec.smoothness * scale * scale);
}

}  // namespace robustmargin
