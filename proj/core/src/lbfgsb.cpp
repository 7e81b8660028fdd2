#include "bolt/lbfgsb.hpp"

#include <cmath>
#include <deque>

namespace bolt {
namespace {

struct Correction {
  Vector s;
  Vector y;
  double rho;
};

Vector clip(const Vector& x, const Vector& lower, const Vector& upper) { return x.cwiseMax(lower).cwiseMin(upper); }

// Zeroes components frozen at a bound.
Vector free_mask(const Vector& x, const Vector& g, const Vector& lower, const Vector& upper) {
  Vector mask = Vector::Ones(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if ((x[i] <= lower[i] && g[i] > 0.0) || (x[i] >= upper[i] && g[i] < 0.0)) mask[i] = 0.0;
  }
  return mask;
}

Vector two_loop(const std::deque<Correction>& memory, const Vector& q_in, const Vector& mask) {
  Vector q = q_in;
  std::vector<double> alphas(memory.size());
  for (std::size_t k = memory.size(); k-- > 0;) {
    const auto& c = memory[k];
    alphas[k] = c.rho * c.s.cwiseProduct(mask).dot(q);
    q -= alphas[k] * c.y.cwiseProduct(mask);
  }
  const auto& last = memory.back();
  const Vector ym = last.y.cwiseProduct(mask);
  const double yy = ym.squaredNorm();
  const double sy = last.s.cwiseProduct(mask).dot(ym);
  double gamma = (yy > 0.0 && sy > 0.0) ? sy / yy : 1.0;
  Vector r = gamma * q;
  for (std::size_t k = 0; k < memory.size(); ++k) {
    const auto& c = memory[k];
    const double beta = c.rho * c.y.cwiseProduct(mask).dot(r);
    r += (alphas[k] - beta) * c.s.cwiseProduct(mask);
  }
  return r.cwiseProduct(mask);
}

}  // namespace

BoxMinimizerResult minimize_in_box(const ValueAndGradient& f, const Vector& x0, const Vector& lower,
                                   const Vector& upper, const BoxMinimizerOptions& options) {
  BoxMinimizerResult result;
  Vector x = clip(x0, lower, upper);
  Vector g = Vector::Zero(x.size());
  double fx = f(x, g);
  result.evaluations = 1;
  result.x = x;
  result.value = fx;
  if (!std::isfinite(fx) || !g.allFinite()) return result;

  std::deque<Correction> memory;
  Vector gn(x.size());
  for (std::size_t iter = 0; iter < options.max_iterations; ++iter) {
    const Vector projected_step = clip(x - g, lower, upper) - x;
    if (projected_step.lpNorm<Eigen::Infinity>() < options.gradient_tolerance) {
      result.converged = true;
      break;
    }
    const Vector mask = free_mask(x, g, lower, upper);
    const Vector g_free = g.cwiseProduct(mask);

    bool accepted = false;
    Vector xn;
    double fn = fx;
    // Quasi-Newton direction first; fall back to steepest descent once.
    for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
      const bool use_memory = attempt == 0 && !memory.empty();
      Vector d = use_memory ? Vector(-two_loop(memory, g_free, mask)) : Vector(-g_free);
      if (use_memory && d.dot(g_free) >= 0.0) d = -g_free;
      double step = use_memory ? 1.0 : std::min(1.0, 1.0 / std::max(g_free.norm(), 1e-300));
      for (std::size_t ls = 0; ls < options.max_line_search; ++ls, step *= options.shrink) {
        xn = clip(x + step * d, lower, upper);
        const Vector delta = xn - x;
        if (delta.lpNorm<Eigen::Infinity>() == 0.0) break;
        fn = f(xn, gn);
        ++result.evaluations;
        if (!std::isfinite(fn) || !gn.allFinite()) continue;
        const double slope = std::min(g.dot(delta), 0.0);
        if (fn < fx && fn <= fx + options.armijo * slope) {
          accepted = true;
          break;
        }
      }
      if (!use_memory) break;
      if (!accepted) memory.clear();
    }
    ++result.iterations;
    if (!accepted) break;

    Vector s = xn - x;
    Vector y = gn - g;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm() && sy > 0.0) {
      memory.push_back({std::move(s), std::move(y), 1.0 / sy});
      if (memory.size() > options.memory) memory.pop_front();
    }
    x = xn;
    fx = fn;
    g = gn;
  }
  result.x = x;
  result.value = fx;
  return result;
}

BoxMinimizerResult maximize_in_box(const ValueAndGradient& f, const Vector& x0, const Vector& lower,
                                   const Vector& upper, const BoxMinimizerOptions& options) {
  auto negated = [&f](const Vector& x, Vector& g) {
    const double v = f(x, g);
    g = -g;
    return -v;
  };
  auto r = minimize_in_box(negated, x0, lower, upper, options);
  r.value = -r.value;
  return r;
}

}  // namespace bolt
