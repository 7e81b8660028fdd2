#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bolt/loop.hpp"

namespace bolt::bench {

double branin(const Vector& x);
double hartmann6(const Vector& x);
// (f1, f2), both in [0, 1).
Vector vlmop2(const Vector& x);
// Disk constraint for the constrained Branin problem; feasible iff <= 0.
double branin_disk_constraint(const Vector& x);

inline constexpr double kBraninMinimum = 0.39788735772973816;
inline constexpr double kHartmann6Minimum = -3.3223680114155147;
// Smallest Branin value on the feasible disk.
inline constexpr double kConstrainedBraninMinimum = 0.45837736037820953;

struct Problem {
  std::string name;
  BoxSpace space;
  std::vector<std::string> tags;
  std::optional<double> known_minimum;  // feasible minimum for constrained problems
  std::string default_acquisition;
  double noise_sd = 0.0;
};

const std::vector<std::string>& problem_names();
// Throws ConfigError listing the available problems.
Problem problem(const std::string& name);

// One value per tag of the problem, in tag order.
Vector evaluate_objective(const std::string& name, const Vector& x);

// Observations of every tag at the rows of x. Noise is drawn from `noise_seed`
// when the problem has noise_sd > 0.
TaggedDatasets evaluate(const Problem& problem, const Matrix& x, RngSeed noise_seed = {});
Observer make_observer(const Problem& problem, RngSeed noise_seed = {});

// Best feasible objective so far (single-objective problems) or the dominated
// hypervolume against (1, 1) (bi-objective problems).
std::optional<double> best_so_far(const Problem& problem, const TaggedDatasets& datasets);

// Per-record best-so-far minus f_min.
std::vector<double> simple_regret(const std::vector<Record>& history, double f_min,
                                  const std::string& tag = std::string(kObjectiveTag));

}  // namespace bolt::bench
