#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>

namespace robustmargin {

/// Training set for robust binary linear classification. Rows of `features`
/// are the sample vectors x_i, `labels` holds y_i in {-1,+1}, and `budgets`
/// holds the per-sample l2 perturbation radii eps_i (same units as feature
/// norms). Values are immutable by convention once constructed and safe to
/// share across threads.
struct Dataset {
  Eigen::MatrixXd features;  // n x p
  Eigen::VectorXd labels;    // n, entries exactly -1 or +1
  Eigen::VectorXd budgets;   // n, entries >= 0

  Eigen::Index n() const { return features.rows(); }
  Eigen::Index p() const { return features.cols(); }

  /// Throws std::invalid_argument if any structural invariant is violated
  /// (empty data, shape mismatch, label not in {-1,+1}, negative budget).
  void validate() const;
};

/// The unit-norm generating separator w* behind a synthetic dataset.
struct GroundTruth {
  Eigen::VectorXd true_weights;
};

struct GenerationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Draws n i.i.d. standard Gaussian rows in p dimensions, labels them with a
/// w* drawn uniformly from the unit sphere, and rejects samples whose
/// functional margin |x^T w*| falls below min_margin. Budgets start at zero.
/// Deterministic for a fixed seed. Throws GenerationError if a sample needs
/// more than 10^6 redraws.
std::pair<Dataset, GroundTruth> generate_gaussian(Eigen::Index n, Eigen::Index p,
                                                  std::uint64_t seed,
                                                  double min_margin = 0.0);

/// Recipe for filling Dataset::budgets.
struct BudgetScheme {
  enum class Kind { Uniform, Fraction, UniformRandom };

  Kind kind = Kind::Uniform;
  double eps = 0.0;  // Uniform, Fraction
  double q = 0.0;    // Fraction
  double lo = 0.0;   // UniformRandom
  double hi = 0.0;   // UniformRandom
  std::uint64_t seed = 0;

  /// eps_i = eps for every sample.
  static BudgetScheme uniform(double eps);
  /// eps_i = eps on a seed-chosen floor(q*n)-subset, 0 elsewhere.
  static BudgetScheme fraction(double q, double eps, std::uint64_t seed);
  /// eps_i drawn i.i.d. uniform on [lo, hi].
  static BudgetScheme uniform_random(double lo, double hi, std::uint64_t seed);
};

/// Returns a copy of d with budgets filled per the scheme. Rejects negative
/// radii and fractions outside [0, 1].
Dataset assign_budgets(const Dataset& d, const BudgetScheme& scheme);

/// Returns a copy with each row moved to x_i - eps_i * y_i * w*: the
/// worst-case shift toward the true boundary. Labels and budgets unchanged.
Dataset apply_adversarial_shift(const Dataset& d, const GroundTruth& g);

/// True iff some w satisfies y_i x_i^T w > 0 for all i, decided by solving
/// the max-margin program and checking feasibility.
bool is_linearly_separable(const Dataset& d);

struct ParseError : std::runtime_error {
  ParseError(const std::string& path, std::size_t line_number, const std::string& message);
  std::size_t line;
};

/// CSV schema: header `y,eps,x1,...,xp`, one row per sample, shortest
/// round-trip decimal floats, LF line endings. load(save(d)) == d exactly.
void save_csv(const Dataset& d, const std::string& path);
Dataset load_csv(const std::string& path);

/// In-memory forms of the same schema (used by the CLI determinism checks).
std::string to_csv(const Dataset& d);
Dataset from_csv(const std::string& text, const std::string& origin = "<string>");

void save_ground_truth_json(const GroundTruth& g, const std::string& path);
GroundTruth load_ground_truth_json(const std::string& path);

}  // namespace robustmargin
