#include "bolt/acquisition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "bolt/error.hpp"
#include "bolt/numerics.hpp"

namespace bolt::acquisition {

using numerics::normal_cdf;
using numerics::normal_pdf;

Scalar expected_improvement(double mean, double variance, double incumbent) {
  const double sd = std::sqrt(std::max(variance, 0.0));
  const double delta = incumbent - mean;
  if (sd < kDegenerateSd) return {std::max(delta, 0.0), delta > 0.0 ? -1.0 : 0.0, 0.0};
  const double z = delta / sd;
  const double cdf = normal_cdf(z);
  const double pdf = normal_pdf(z);
  return {delta * cdf + sd * pdf, -cdf, pdf / (2.0 * sd)};
}

Scalar augmented_expected_improvement(double mean, double variance, double noise_variance, double incumbent) {
  const Scalar ei = expected_improvement(mean, variance, incumbent);
  if (noise_variance <= 0.0) return ei;
  const double total = std::max(variance, 0.0) + noise_variance;
  const double noise_sd = std::sqrt(noise_variance);
  const double factor = 1.0 - noise_sd / std::sqrt(total);
  const double d_factor = 0.5 * noise_sd / (total * std::sqrt(total));
  return {ei.value * factor, ei.d_mean * factor, ei.d_variance * factor + ei.value * d_factor};
}

Scalar negative_lower_confidence_bound(double mean, double variance, double beta) {
  const double sd = std::sqrt(std::max(variance, 0.0));
  return {-mean + beta * sd, -1.0, sd < kDegenerateSd ? 0.0 : beta / (2.0 * sd)};
}

Scalar probability_of_feasibility(double mean, double variance, double threshold) {
  const double sd = std::sqrt(std::max(variance, 0.0));
  if (sd < kDegenerateSd) return {mean <= threshold ? 1.0 : 0.0, 0.0, 0.0};
  const double z = (threshold - mean) / sd;
  const double pdf = normal_pdf(z);
  return {normal_cdf(z), -pdf / sd, -pdf * z / (2.0 * variance)};
}

Scalar expected_feasibility(double mean, double variance, const LevelSetConfig& config) {
  if (!(config.alpha > 0.0)) throw ValidationError("expected feasibility needs alpha > 0", "alpha");
  const double sd = std::sqrt(std::max(variance, 0.0));
  if (sd < kDegenerateSd) return {0.0, 0.0, 0.0};
  const double a = config.alpha;
  const double eps = a * sd;
  const double t = config.threshold;
  const double z = (t - mean) / sd;
  const double cdf = normal_cdf(z);
  const double cdf_lo = normal_cdf(z - a);
  const double cdf_hi = normal_cdf(z + a);
  const double value = (t - mean) * (cdf_hi + cdf_lo - 2.0 * cdf) -
                       sd * (2.0 * normal_pdf(z) - normal_pdf(z - a) - normal_pdf(z + a)) +
                       eps * (cdf_hi - cdf_lo);
  // value = sd * G(z); G'(z) = Phi(z + a) + Phi(z - a) - 2 Phi(z).
  const double g_prime = cdf_hi + cdf_lo - 2.0 * cdf;
  const double d_sd = value / sd - z * g_prime;
  return {value, -g_prime, d_sd / (2.0 * sd)};
}

Scalar predictive_variance(double /*mean*/, double variance) { return {std::max(variance, 0.0), 0.0, 1.0}; }

Matrix non_dominated(const Matrix& observations) {
  if (observations.rows() > 0 && observations.cols() != 2) {
    throw DimensionError("Pareto machinery supports exactly two objectives, got " +
                         std::to_string(observations.cols()));
  }
  std::vector<std::pair<double, double>> rows;
  rows.reserve(static_cast<std::size_t>(observations.rows()));
  for (Eigen::Index i = 0; i < observations.rows(); ++i) rows.emplace_back(observations(i, 0), observations(i, 1));
  std::sort(rows.begin(), rows.end());
  rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
  std::vector<std::pair<double, double>> front;
  double best_second = std::numeric_limits<double>::infinity();
  for (const auto& row : rows) {
    if (row.second < best_second) {
      front.push_back(row);
      best_second = row.second;
    }
  }
  Matrix out(static_cast<Eigen::Index>(front.size()), 2);
  for (std::size_t i = 0; i < front.size(); ++i) {
    out(static_cast<Eigen::Index>(i), 0) = front[i].first;
    out(static_cast<Eigen::Index>(i), 1) = front[i].second;
  }
  return out;
}

ParetoFront pareto_front(const Matrix& observations, const Vector& reference) {
  if (reference.size() != 2 || !reference.allFinite()) {
    throw ValidationError("reference point must be two finite values", "reference");
  }
  if (observations.rows() > 0 && observations.cols() != 2) {
    throw DimensionError("Pareto machinery supports exactly two objectives");
  }
  Matrix kept(observations.rows(), 2);
  Eigen::Index n = 0;
  for (Eigen::Index i = 0; i < observations.rows(); ++i) {
    if (observations(i, 0) < reference[0] && observations(i, 1) < reference[1]) kept.row(n++) = observations.row(i);
  }
  return {non_dominated(kept.topRows(n)), reference};
}

double hypervolume(const ParetoFront& front) {
  double volume = 0.0;
  double previous = front.reference[1];
  for (Eigen::Index i = 0; i < front.points.rows(); ++i) {
    volume += (front.reference[0] - front.points(i, 0)) * (previous - front.points(i, 1));
    previous = front.points(i, 1);
  }
  return volume;
}

double hypervolume_improvement(const ParetoFront& front, double y0, double y1, Vector* gradient) {
  const double r0 = front.reference[0];
  const double r1 = front.reference[1];
  if (gradient) *gradient = Vector::Zero(2);
  if (!(y0 < r0) || !(y1 < r1)) return 0.0;

  // The region dominated by the front, seen from the first axis, is a staircase
  // S(u) = min{p1 : p0 <= u}. The improvement integrates (min(S, r1) - y1)^+ over [y0, r0).
  double improvement = 0.0;
  auto add = [&](double start, double end, double level) {
    const double lo = std::max(start, y0);
    const double hi = std::min(end, r0);
    const double height = std::min(level, r1) - y1;
    if (hi > lo && height > 0.0) improvement += (hi - lo) * height;
  };
  double previous_x = -std::numeric_limits<double>::infinity();
  double level = r1;
  double level_at_y0 = r1;
  double first_x_below = r0;
  bool found_below = false;
  for (Eigen::Index i = 0; i < front.points.rows(); ++i) {
    const double px = front.points(i, 0);
    const double py = front.points(i, 1);
    add(previous_x, px, level);
    if (px <= y0) level_at_y0 = py;
    if (!found_below && py <= y1) {
      first_x_below = std::min(px, r0);
      found_below = true;
    }
    previous_x = px;
    level = py;
  }
  add(previous_x, r0, level);
  if (gradient) {
    (*gradient)[0] = -std::max(std::min(level_at_y0, r1) - y1, 0.0);
    (*gradient)[1] = -std::max(first_x_below - y0, 0.0);
  }
  return improvement;
}

EhviEstimate ehvi_mc(const Vector& mean, const Matrix& covariance, const ParetoFront& front, std::size_t samples,
                     RngSeed seed) {
  if (samples == 0) throw ValidationError("ehvi needs at least one Monte-Carlo sample", "mc");
  if (mean.size() != 2 || covariance.rows() != 2 || covariance.cols() != 2) {
    throw DimensionError("ehvi expects a bivariate posterior");
  }
  // Lower-triangular square root, tolerant of semi-definite input.
  const double a = std::sqrt(std::max(covariance(0, 0), 0.0));
  const double b = a > 0.0 ? covariance(1, 0) / a : 0.0;
  const double c = std::sqrt(std::max(covariance(1, 1) - b * b, 0.0));
  Rng rng(seed);
  double sum = 0.0;
  double sum_sq = 0.0;
  for (std::size_t s = 0; s < samples; ++s) {
    const double z0 = rng.normal();
    const double z1 = rng.normal();
    const double hvi = hypervolume_improvement(front, mean[0] + a * z0, mean[1] + b * z0 + c * z1);
    sum += hvi;
    sum_sq += hvi * hvi;
  }
  const double n = static_cast<double>(samples);
  const double avg = sum / n;
  const double var = samples > 1 ? std::max(sum_sq / n - avg * avg, 0.0) * n / (n - 1.0) : 0.0;
  return {avg, std::sqrt(var / n)};
}

EhviWithGradient ehvi_mc_independent(const Vector& mean, const Vector& variance, const ParetoFront& front,
                                     const Matrix& standard_normals) {
  EhviWithGradient out{0.0, Vector::Zero(2), Vector::Zero(2)};
  const Eigen::Index samples = standard_normals.rows();
  if (samples == 0) return out;
  const double sd0 = std::sqrt(std::max(variance[0], 0.0));
  const double sd1 = std::sqrt(std::max(variance[1], 0.0));
  Vector g(2);
  for (Eigen::Index s = 0; s < samples; ++s) {
    const double z0 = standard_normals(s, 0);
    const double z1 = standard_normals(s, 1);
    out.value += hypervolume_improvement(front, mean[0] + sd0 * z0, mean[1] + sd1 * z1, &g);
    out.d_mean += g;
    if (sd0 >= kDegenerateSd) out.d_variance[0] += g[0] * z0 / (2.0 * sd0);
    if (sd1 >= kDegenerateSd) out.d_variance[1] += g[1] * z1 / (2.0 * sd1);
  }
  const double n = static_cast<double>(samples);
  out.value /= n;
  out.d_mean /= n;
  out.d_variance /= n;
  return out;
}

PenalizationState make_penalization_state(const ProbabilisticModel& model, double lipschitz, double incumbent_min,
                                          const Matrix& pending) {
  if (!(lipschitz > 0.0)) throw ValidationError("Lipschitz constant must be positive", "lipschitz");
  PenalizationState state;
  state.lipschitz = lipschitz;
  state.incumbent_min = incumbent_min;
  state.pending = pending;
  if (pending.rows() > 0) {
    auto p = model.predict(pending);
    state.pending_mean = std::move(p.mean);
    state.pending_variance = std::move(p.variance);
  } else {
    state.pending_mean = Vector(0);
    state.pending_variance = Vector(0);
  }
  return state;
}

double estimate_lipschitz(const ProbabilisticModel& model, const Matrix& points) {
  double best = 0.0;
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    best = std::max(best, model.predict_with_gradient(points.row(i).transpose()).mean_gradient.norm());
  }
  return std::max(best, 1e-4);
}

double local_penalizer(const Vector& x, std::size_t pending_index, const PenalizationState& state) {
  const auto j = static_cast<Eigen::Index>(pending_index);
  const double distance = (x - state.pending.row(j).transpose()).norm();
  const double radius_term = state.pending_mean[j] - state.incumbent_min;
  const double var = state.pending_variance[j];
  if (var <= 0.0) return state.lipschitz * distance >= radius_term ? 1.0 : 0.0;
  return normal_cdf((state.lipschitz * distance - radius_term) / std::sqrt(2.0 * var));
}

double log_penalization(const Vector& x, const PenalizationState& state, Vector* gradient) {
  if (gradient) *gradient = Vector::Zero(x.size());
  double total = 0.0;
  for (Eigen::Index j = 0; j < state.pending.rows(); ++j) {
    const Vector diff = x - state.pending.row(j).transpose();
    const double distance = diff.norm();
    const double radius_term = state.pending_mean[j] - state.incumbent_min;
    const double var = state.pending_variance[j];
    if (var <= 0.0) {
      if (state.lipschitz * distance < radius_term) return -std::numeric_limits<double>::infinity();
      continue;
    }
    const double scale = std::sqrt(2.0 * var);
    const double z = (state.lipschitz * distance - radius_term) / scale;
    total += numerics::log_normal_cdf(z);
    if (gradient && distance > 0.0) {
      *gradient += numerics::inverse_mills_ratio(z) * state.lipschitz / scale * diff / distance;
    }
  }
  return total;
}

}  // namespace bolt::acquisition
