#pragma once

#include <cstddef>

#include "bolt/models.hpp"
#include "bolt/random.hpp"
#include "bolt/spaces.hpp"

// Acquisition values are maximized; objectives are minimized.
namespace bolt::acquisition {

// An acquisition value together with its partial derivatives with respect to
// the posterior mean and the posterior (latent) variance.
struct Scalar {
  double value = 0.0;
  double d_mean = 0.0;
  double d_variance = 0.0;
};

// Below this standard deviation the posterior is treated as a point mass.
inline constexpr double kDegenerateSd = 1e-12;

Scalar expected_improvement(double mean, double variance, double incumbent);

// EI against the effective incumbent, scaled by 1 - sqrt(noise) / sqrt(variance + noise).
Scalar augmented_expected_improvement(double mean, double variance, double noise_variance, double incumbent);

// -mean + beta * sd.
Scalar negative_lower_confidence_bound(double mean, double variance, double beta);

// P(Y <= threshold).
Scalar probability_of_feasibility(double mean, double variance, double threshold);

struct LevelSetConfig {
  double threshold = 0.0;
  double alpha = 2.0;  // band half-width epsilon = alpha * sd
};

// E[max(eps - |t - Y|, 0)], Y ~ N(mean, variance).
Scalar expected_feasibility(double mean, double variance, const LevelSetConfig& config);

Scalar predictive_variance(double mean, double variance);

// Two-objective front: rows mutually non-dominated, sorted by the first objective.
struct ParetoFront {
  Matrix points;  // P x 2
  Vector reference;
};

// Distinct non-dominated rows of an N x 2 matrix, sorted ascending by the first column.
Matrix non_dominated(const Matrix& observations);

// Front of the rows strictly better than `reference` on both objectives.
ParetoFront pareto_front(const Matrix& observations, const Vector& reference);

double hypervolume(const ParetoFront& front);

// hypervolume(front + {y}) - hypervolume(front). Writes d/dy when gradient != nullptr.
double hypervolume_improvement(const ParetoFront& front, double y0, double y1, Vector* gradient = nullptr);

struct EhviEstimate {
  double value = 0.0;
  double standard_error = 0.0;
};

// Monte-Carlo expected hypervolume improvement under a bivariate normal posterior.
EhviEstimate ehvi_mc(const Vector& mean, const Matrix& covariance, const ParetoFront& front, std::size_t samples,
                     RngSeed seed);

// Same estimator for independent objectives, with derivatives taken through the
// reparameterisation y = mean + sd * z (common random numbers).
struct EhviWithGradient {
  double value = 0.0;
  Vector d_mean;      // 2
  Vector d_variance;  // 2
};
EhviWithGradient ehvi_mc_independent(const Vector& mean, const Vector& variance, const ParetoFront& front,
                                     const Matrix& standard_normals);

struct PenalizationState {
  double lipschitz = 1.0;
  double incumbent_min = 0.0;
  Matrix pending;            // B x D
  Vector pending_mean;       // posterior mean at pending rows
  Vector pending_variance;   // posterior variance at pending rows
};

// Fills the posterior summaries of `pending` from the model.
PenalizationState make_penalization_state(const ProbabilisticModel& model, double lipschitz, double incumbent_min,
                                          const Matrix& pending);

// Max posterior-mean gradient norm over `points`, floored at 1e-4.
double estimate_lipschitz(const ProbabilisticModel& model, const Matrix& points);

// psi_j(x) = Phi((L ||x - x_j|| - (mu(x_j) - M)) / sqrt(2 s^2(x_j))).
double local_penalizer(const Vector& x, std::size_t pending_index, const PenalizationState& state);

// sum_j log psi_j(x) and its gradient.
double log_penalization(const Vector& x, const PenalizationState& state, Vector* gradient = nullptr);

}  // namespace bolt::acquisition
