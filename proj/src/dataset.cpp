#include "robustmargin/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "robustmargin/margin_solvers.hpp"
#include "num_format.hpp"

namespace robustmargin {

namespace {

constexpr std::size_t kMaxRedraws = 1000000;

Eigen::VectorXd gaussian_vector(Eigen::Index p, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd v(p);
  for (Eigen::Index j = 0; j < p; ++j) v[j] = normal(rng);
  return v;
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << contents;
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

void Dataset::validate() const {
  if (features.rows() < 1 || features.cols() < 1)
    throw std::invalid_argument("dataset must have n >= 1 and p >= 1");
  if (labels.size() != features.rows() || budgets.size() != features.rows())
    throw std::invalid_argument("labels/budgets length must match feature rows");
  for (Eigen::Index i = 0; i < labels.size(); ++i) {
    if (labels[i] != 1.0 && labels[i] != -1.0)
      throw std::invalid_argument("label must be exactly -1 or +1");
    if (!(budgets[i] >= 0.0))
      throw std::invalid_argument("budgets must be non-negative");
  }
}

std::pair<Dataset, GroundTruth> generate_gaussian(Eigen::Index n, Eigen::Index p,
                                                  std::uint64_t seed, double min_margin) {
  if (n < 1 || p < 1) throw std::invalid_argument("generate_gaussian: n >= 1, p >= 1");
  if (min_margin < 0.0) throw std::invalid_argument("generate_gaussian: min_margin >= 0");

  std::mt19937_64 rng(seed);
  Eigen::VectorXd wstar = gaussian_vector(p, rng);
  while (wstar.norm() == 0.0) wstar = gaussian_vector(p, rng);
  wstar /= wstar.norm();

  Dataset d;
  d.features.resize(n, p);
  d.labels.resize(n);
  d.budgets = Eigen::VectorXd::Zero(n);

  for (Eigen::Index i = 0; i < n; ++i) {
    std::size_t draws = 0;
    for (;;) {
      if (++draws > kMaxRedraws)
        throw GenerationError("generate_gaussian: sample " + std::to_string(i) +
                              " exceeded the redraw cap");
      Eigen::VectorXd x = gaussian_vector(p, rng);
      double dot = x.dot(wstar);
      if (std::abs(dot) < min_margin || dot == 0.0) continue;
      d.features.row(i) = x.transpose();
      d.labels[i] = dot > 0.0 ? 1.0 : -1.0;
      break;
    }
  }
  return {std::move(d), GroundTruth{std::move(wstar)}};
}

BudgetScheme BudgetScheme::uniform(double eps) {
  BudgetScheme s;
  s.kind = Kind::Uniform;
  s.eps = eps;
  return s;
}

BudgetScheme BudgetScheme::fraction(double q, double eps, std::uint64_t seed) {
  BudgetScheme s;
  s.kind = Kind::Fraction;
  s.q = q;
  s.eps = eps;
  s.seed = seed;
  return s;
}

BudgetScheme BudgetScheme::uniform_random(double lo, double hi, std::uint64_t seed) {
  BudgetScheme s;
  s.kind = Kind::UniformRandom;
  s.lo = lo;
  s.hi = hi;
  s.seed = seed;
  return s;
}

Dataset assign_budgets(const Dataset& d, const BudgetScheme& scheme) {
  d.validate();
  Dataset out = d;
  const Eigen::Index n = d.n();
  switch (scheme.kind) {
    case BudgetScheme::Kind::Uniform: {
      if (scheme.eps < 0.0) throw std::invalid_argument("uniform budget: eps >= 0");
      out.budgets.setConstant(scheme.eps);
      break;
    }
    case BudgetScheme::Kind::Fraction: {
      if (scheme.eps < 0.0) throw std::invalid_argument("fraction budget: eps >= 0");
      if (scheme.q < 0.0 || scheme.q > 1.0)
        throw std::invalid_argument("fraction budget: q in [0, 1]");
      out.budgets.setZero();
      const auto k = static_cast<Eigen::Index>(scheme.q * static_cast<double>(n));
      std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
      std::iota(idx.begin(), idx.end(), Eigen::Index{0});
      std::mt19937_64 rng(scheme.seed);
      std::shuffle(idx.begin(), idx.end(), rng);
      for (Eigen::Index j = 0; j < k; ++j) out.budgets[idx[static_cast<std::size_t>(j)]] = scheme.eps;
      break;
    }
    case BudgetScheme::Kind::UniformRandom: {
      if (scheme.lo < 0.0 || scheme.hi < scheme.lo)
        throw std::invalid_argument("uniform_random budget: 0 <= lo <= hi");
      std::mt19937_64 rng(scheme.seed);
      std::uniform_real_distribution<double> u(scheme.lo, scheme.hi);
      for (Eigen::Index i = 0; i < n; ++i) out.budgets[i] = u(rng);
      break;
    }
  }
  return out;
}

Dataset apply_adversarial_shift(const Dataset& d, const GroundTruth& g) {
  d.validate();
  if (g.true_weights.size() != d.p())
    throw std::invalid_argument("apply_adversarial_shift: dimension mismatch");
  Dataset out = d;
  for (Eigen::Index i = 0; i < d.n(); ++i)
    out.features.row(i) -= d.budgets[i] * d.labels[i] * g.true_weights.transpose();
  return out;
}

bool is_linearly_separable(const Dataset& d) {
  return max_margin(d).status == SolverStatus::optimal;
}

ParseError::ParseError(const std::string& path, std::size_t line_number,
                       const std::string& message)
    : std::runtime_error(path + ":" + std::to_string(line_number) + ": " + message),
      line(line_number) {}

std::string to_csv(const Dataset& d) {
  d.validate();
  std::string out = "y,eps";
  for (Eigen::Index j = 1; j <= d.p(); ++j) out += ",x" + std::to_string(j);
  out += "\n";
  for (Eigen::Index i = 0; i < d.n(); ++i) {
    out += detail::format_double(d.labels[i]);
    out += ",";
    out += detail::format_double(d.budgets[i]);
    for (Eigen::Index j = 0; j < d.p(); ++j) {
      out += ",";
      out += detail::format_double(d.features(i, j));
    }
    out += "\n";
  }
  return out;
}

Dataset from_csv(const std::string& text, const std::string& origin) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;

  auto split = [](const std::string& s) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (;;) {
      auto pos = s.find(',', start);
      if (pos == std::string::npos) {
        fields.push_back(s.substr(start));
        return fields;
      }
      fields.push_back(s.substr(start, pos - start));
      start = pos + 1;
    }
  };

  if (!std::getline(in, line)) throw ParseError(origin, 1, "empty file");
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  auto header = split(line);
  if (header.size() < 3 || header[0] != "y" || header[1] != "eps")
    throw ParseError(origin, line_no, "header must be y,eps,x1,...,xp");
  const auto p = static_cast<Eigen::Index>(header.size() - 2);
  for (Eigen::Index j = 0; j < p; ++j)
    if (header[static_cast<std::size_t>(j) + 2] != "x" + std::to_string(j + 1))
      throw ParseError(origin, line_no, "header must be y,eps,x1,...,xp");

  std::vector<double> labels, budgets, values;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split(line);
    if (static_cast<Eigen::Index>(fields.size()) != p + 2)
      throw ParseError(origin, line_no,
                       "expected " + std::to_string(p + 2) + " fields, got " +
                           std::to_string(fields.size()));
    double y = 0.0, eps = 0.0;
    if (!detail::parse_double(fields[0], y)) throw ParseError(origin, line_no, "bad label");
    if (y != 1.0 && y != -1.0) throw ParseError(origin, line_no, "label must be -1 or +1");
    if (!detail::parse_double(fields[1], eps)) throw ParseError(origin, line_no, "bad budget");
    if (!(eps >= 0.0) || !std::isfinite(eps))
      throw ParseError(origin, line_no, "budget must be non-negative and finite");
    labels.push_back(y);
    budgets.push_back(eps);
    for (Eigen::Index j = 0; j < p; ++j) {
      double v = 0.0;
      if (!detail::parse_double(fields[static_cast<std::size_t>(j) + 2], v) ||
          !std::isfinite(v))
        throw ParseError(origin, line_no, "bad feature value");
      values.push_back(v);
    }
  }
  const auto n = static_cast<Eigen::Index>(labels.size());
  if (n == 0) throw ParseError(origin, line_no, "no data rows");

  Dataset d;
  d.features.resize(n, p);
  d.labels.resize(n);
  d.budgets.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    d.labels[i] = labels[static_cast<std::size_t>(i)];
    d.budgets[i] = budgets[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < p; ++j)
      d.features(i, j) = values[static_cast<std::size_t>(i * p + j)];
  }
  return d;
}

void save_csv(const Dataset& d, const std::string& path) { write_file(path, to_csv(d)); }

Dataset load_csv(const std::string& path) { return from_csv(read_file(path), path); }

void save_ground_truth_json(const GroundTruth& g, const std::string& path) {
  nlohmann::json j;
  j["true_weights"] = std::vector<double>(g.true_weights.begin(), g.true_weights.end());
  write_file(path, j.dump(2) + "\n");
}

GroundTruth load_ground_truth_json(const std::string& path) {
  auto j = nlohmann::json::parse(read_file(path));
  const auto& arr = j.at("true_weights");
  Eigen::VectorXd w(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i) w[static_cast<Eigen::Index>(i)] = arr[i].get<double>();
  return GroundTruth{std::move(w)};
}

}  // namespace robustmargin
