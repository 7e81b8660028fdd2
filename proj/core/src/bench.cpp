#include "bolt/bench.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "bolt/acquisition.hpp"

namespace bolt::bench {
namespace {

constexpr double kPi = std::numbers::pi;

void require_dim(const Vector& x, Eigen::Index d, const char* name) {
  if (x.size() != d)
    throw DimensionError(std::string(name) + " expects " + std::to_string(d) + " inputs, got " +
                         std::to_string(x.size()),
                         "x");
}

Vector row(const Matrix& x, Eigen::Index i) { return x.row(i).transpose(); }

}  // namespace

double branin(const Vector& x) {
  require_dim(x, 2, "branin");
  const double b = 5.1 / (4.0 * kPi * kPi);
  const double c = 5.0 / kPi;
  const double t = 1.0 / (8.0 * kPi);
  const double u = x[1] - b * x[0] * x[0] + c * x[0] - 6.0;
  return u * u + 10.0 * (1.0 - t) * std::cos(x[0]) + 10.0;
}

double hartmann6(const Vector& x) {
  require_dim(x, 6, "hartmann6");
  static constexpr double alpha[4] = {1.0, 1.2, 3.0, 3.2};
  static constexpr double a[4][6] = {{10, 3, 17, 3.5, 1.7, 8},
                                     {0.05, 10, 17, 0.1, 8, 14},
                                     {3, 3.5, 1.7, 10, 17, 8},
                                     {17, 8, 0.05, 10, 0.1, 14}};
  static constexpr double p[4][6] = {{0.1312, 0.1696, 0.5569, 0.0124, 0.8283, 0.5886},
                                     {0.2329, 0.4135, 0.8307, 0.3736, 0.1004, 0.9991},
                                     {0.2348, 0.1451, 0.3522, 0.2883, 0.3047, 0.6650},
                                     {0.4047, 0.8828, 0.8732, 0.5743, 0.1091, 0.0381}};
  double total = 0.0;
  for (int i = 0; i < 4; ++i) {
    double inner = 0.0;
    for (int j = 0; j < 6; ++j) {
      const double d = x[j] - p[i][j];
      inner += a[i][j] * d * d;
    }
    total += alpha[i] * std::exp(-inner);
  }
  return -total;
}

Vector vlmop2(const Vector& x) {
  require_dim(x, 2, "vlmop2");
  const double s = 1.0 / std::numbers::sqrt2;
  double a = 0.0;
  double b = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    a += (x[i] - s) * (x[i] - s);
    b += (x[i] + s) * (x[i] + s);
  }
  Vector out(2);
  out << 1.0 - std::exp(-a), 1.0 - std::exp(-b);
  return out;
}

double branin_disk_constraint(const Vector& x) {
  require_dim(x, 2, "branin_disk_constraint");
  const double dx = x[0] - 2.5;
  const double dy = x[1] - 7.5;
  return dx * dx + dy * dy - 25.0;
}

const std::vector<std::string>& problem_names() {
  static const std::vector<std::string> names{"branin", "hartmann6", "vlmop2", "constrained_branin"};
  return names;
}

Problem problem(const std::string& name) {
  const Vector branin_lo = Eigen::Vector2d(-5.0, 0.0);
  const Vector branin_hi = Eigen::Vector2d(10.0, 15.0);
  if (name == "branin") return {name, BoxSpace(branin_lo, branin_hi), {"OBJECTIVE"}, kBraninMinimum, "ei"};
  if (name == "hartmann6")
    return {name, BoxSpace(Vector::Zero(6), Vector::Ones(6)), {"OBJECTIVE"}, kHartmann6Minimum, "ei"};
  if (name == "vlmop2")
    return {name, BoxSpace(Vector::Constant(2, -2.0), Vector::Constant(2, 2.0)), {"OBJECTIVE_1", "OBJECTIVE_2"},
            std::nullopt, "ehvi"};
  if (name == "constrained_branin")
    return {name, BoxSpace(branin_lo, branin_hi), {"CONSTRAINT", "OBJECTIVE"}, kConstrainedBraninMinimum, "cei"};
  std::string list;
  for (const auto& n : problem_names()) list += (list.empty() ? "" : ", ") + n;
  throw ConfigError("unknown problem '" + name + "' (available: " + list + ")", "problem");
}

Vector evaluate_objective(const std::string& name, const Vector& x) {
  if (name == "branin") return Vector::Constant(1, branin(x));
  if (name == "hartmann6") return Vector::Constant(1, hartmann6(x));
  if (name == "vlmop2") return vlmop2(x);
  if (name == "constrained_branin") {
    Vector out(2);
    out << branin_disk_constraint(x), branin(x);
    return out;
  }
  problem(name);
  return {};
}

TaggedDatasets evaluate(const Problem& problem, const Matrix& x, RngSeed noise_seed) {
  const auto tags = static_cast<Eigen::Index>(problem.tags.size());
  Matrix values(x.rows(), tags);
  Rng rng(noise_seed);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    values.row(i) = evaluate_objective(problem.name, row(x, i)).transpose();
    if (problem.noise_sd > 0.0)
      for (Eigen::Index t = 0; t < tags; ++t) values(i, t) += problem.noise_sd * rng.normal();
  }
  TaggedDatasets::Map entries;
  for (Eigen::Index t = 0; t < tags; ++t)
    entries.emplace(problem.tags[static_cast<std::size_t>(t)], Dataset(x, values.col(t)));
  return TaggedDatasets(std::move(entries));
}

Observer make_observer(const Problem& problem, RngSeed noise_seed) {
  auto calls = std::make_shared<std::uint64_t>(0);
  return [problem, noise_seed, calls](const Matrix& x) { return evaluate(problem, x, derive_seed(noise_seed, (*calls)++)); };
}

std::optional<double> best_so_far(const Problem& problem, const TaggedDatasets& datasets) {
  if (problem.name == "vlmop2") {
    const Matrix obs = objective_matrix(datasets, problem.tags);
    return acquisition::hypervolume(acquisition::pareto_front(obs, Eigen::Vector2d(1.0, 1.0)));
  }
  AcquisitionSpec spec;
  if (problem.name != "constrained_branin") spec.constraint_tags.clear();
  return feasible_incumbent(datasets, spec);
}

std::vector<double> simple_regret(const std::vector<Record>& history, double f_min, const std::string& tag) {
  std::vector<double> out;
  out.reserve(history.size());
  double best = std::numeric_limits<double>::infinity();
  for (const auto& r : history) {
    if (r.datasets.contains(tag)) {
      const Dataset& ds = r.datasets.at(tag);
      if (!ds.empty()) best = std::min(best, best_observation(ds).value);
    }
    out.push_back(best - f_min);
  }
  return out;
}

}  // namespace bolt::bench
