#pragma once

#include <cstddef>
#include <functional>

#include "bolt/spaces.hpp"

namespace bolt {

struct BoxMinimizerOptions {
  std::size_t memory = 10;
  std::size_t max_iterations = 100;
  double gradient_tolerance = 1e-8;
  double armijo = 1e-4;
  double shrink = 0.5;
  std::size_t max_line_search = 50;
};

struct BoxMinimizerResult {
  Vector x;
  double value = 0.0;
  std::size_t iterations = 0;
  std::size_t evaluations = 0;
  bool converged = false;
};

// Returns f(x) and writes the gradient. A non-finite value marks x as infeasible.
using ValueAndGradient = std::function<double(const Vector& x, Vector& gradient)>;

// Projected limited-memory BFGS with backtracking along the projection arc.
// Variables pinned at a bound with the gradient pointing outward are frozen
// for the iteration. Accepted steps always decrease f, so the returned value
// never exceeds f(clip(x0)).
BoxMinimizerResult minimize_in_box(const ValueAndGradient& f, const Vector& x0, const Vector& lower,
                                   const Vector& upper, const BoxMinimizerOptions& options = {});

// Ascent counterpart: maximizes f.
BoxMinimizerResult maximize_in_box(const ValueAndGradient& f, const Vector& x0, const Vector& lower,
                                   const Vector& upper, const BoxMinimizerOptions& options = {});

}  // namespace bolt
