#pragma once

#include <Eigen/Cholesky>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bolt/data.hpp"
#include "bolt/random.hpp"
#include "bolt/spaces.hpp"

namespace bolt {

enum class KernelFamily { squared_exponential, matern52 };

std::string to_string(KernelFamily family);
KernelFamily kernel_family_from_string(const std::string& name);

// Stationary ARD kernel: k(x, y) = variance * rho(r), r the lengthscale-scaled distance.
struct Kernel {
  KernelFamily family = KernelFamily::matern52;
  double variance = 1.0;
  Vector lengthscales;

  void validate() const;
  std::size_t input_dim() const noexcept { return static_cast<std::size_t>(lengthscales.size()); }

  double operator()(const Vector& a, const Vector& b) const;

  // k as a function of the scaled squared distance r2.
  double from_scaled_sq_distance(double r2) const noexcept;
  // g(r2) with dk/dx_d = -g * (x_d - y_d) / l_d^2 and dk/dlog(l_d) = g * (x_d - y_d)^2 / l_d^2.
  double radial_derivative(double r2) const noexcept;

  friend bool operator==(const Kernel& a, const Kernel& b) {
    return a.family == b.family && a.variance == b.variance && a.lengthscales.size() == b.lengthscales.size() &&
           a.lengthscales == b.lengthscales;
  }
};

// n x m matrix of k(A_i, B_j).
Matrix kernel_matrix(const Kernel& k, const Matrix& a, const Matrix& b);

struct GPHyperparameters {
  Kernel kernel;
  double mean = 0.0;
  double noise_variance = 0.0;

  void validate() const;
  friend bool operator==(const GPHyperparameters&, const GPHyperparameters&) = default;
};

// Latent (noise-free) marginal posterior.
struct PosteriorPrediction {
  Vector mean;
  Vector variance;
};

struct JointPrediction {
  Vector mean;
  Matrix covariance;
};

// Posterior at one point together with its input gradients.
struct PointPosterior {
  double mean = 0.0;
  double variance = 0.0;
  Vector mean_gradient;
  Vector variance_gradient;
};

// Everything an acquisition rule needs from a surrogate. Implementations are
// immutable once built; fitting returns a new model.
class ProbabilisticModel {
 public:
  virtual ~ProbabilisticModel() = default;

  virtual std::size_t input_dim() const = 0;
  virtual PosteriorPrediction predict(const Matrix& x) const = 0;
  virtual JointPrediction predict_joint(const Matrix& x) const = 0;
  virtual PointPosterior predict_with_gradient(const Vector& x) const = 0;
  // count x q matrix of joint posterior draws at the rows of x.
  virtual Matrix sample(const Matrix& x, std::size_t count, RngSeed seed) const = 0;
  virtual double observation_noise_variance() const = 0;
  virtual std::shared_ptr<const ProbabilisticModel> fit(const Dataset& data, RngSeed seed) const = 0;

  std::pair<Vector, Vector> predict_gradient(const Vector& x) const {
    auto p = predict_with_gradient(x);
    return {std::move(p.mean_gradient), std::move(p.variance_gradient)};
  }
};

struct FitConfig {
  KernelFamily family = KernelFamily::matern52;
  std::size_t restarts = 5;
  double perturbation_sd = 0.5;
  std::size_t max_iterations = 200;
  double gradient_tolerance = 1e-6;
  // Per-axis scale used for lengthscale defaults and bounds. Defaults to the data range.
  std::optional<Vector> input_range;
  // Warm start; restarts are perturbed around it instead of the data defaults.
  std::optional<GPHyperparameters> initial;
  std::optional<double> fixed_noise_variance;
  std::size_t num_threads = 1;
};

struct RestartOutcome {
  bool succeeded = false;
  double initial_lml = 0.0;
  double final_lml = 0.0;
};

struct FitReport {
  std::vector<RestartOutcome> restarts;
  std::size_t best_restart = 0;
  bool skipped = false;
};

class GPModel;

// Exact GP regression with constant mean. Holds the Cholesky factor of
// K + (noise + jitter) I and alpha = (K + ...)^-1 (y - mean).
class GPModel final : public ProbabilisticModel {
 public:
  // Factorizes with the jitter ladder; throws NotPositiveDefiniteError.
  GPModel(GPHyperparameters hyperparameters, Dataset training_data, FitConfig fit_config = {});

  const GPHyperparameters& hyperparameters() const noexcept { return hp_; }
  const Dataset& training_data() const noexcept { return data_; }
  const FitConfig& fit_config() const noexcept { return fit_config_; }
  double jitter() const noexcept { return jitter_; }
  const Matrix& cholesky_factor() const noexcept { return chol_; }
  const Vector& weights() const noexcept { return alpha_; }

  std::size_t input_dim() const override { return hp_.kernel.input_dim(); }
  PosteriorPrediction predict(const Matrix& x) const override;
  JointPrediction predict_joint(const Matrix& x) const override;
  PointPosterior predict_with_gradient(const Vector& x) const override;
  Matrix sample(const Matrix& x, std::size_t count, RngSeed seed) const override;
  double observation_noise_variance() const override { return hp_.noise_variance; }
  std::shared_ptr<const ProbabilisticModel> fit(const Dataset& data, RngSeed seed) const override;

 private:
  void check_input(Eigen::Index cols) const;

  GPHyperparameters hp_;
  Dataset data_;
  FitConfig fit_config_;
  double jitter_ = 0.0;
  Matrix chol_;
  Vector alpha_;
};

// Parameter vector layout: [log v, log l_1..l_D, mean, log noise].
struct LmlResult {
  double value = 0.0;
  Vector gradient;
  double jitter = 0.0;
};

LmlResult log_marginal_likelihood(const GPHyperparameters& hp, const Dataset& data);

Vector pack_hyperparameters(const GPHyperparameters& hp);
GPHyperparameters unpack_hyperparameters(const Vector& theta, KernelFamily family);

// Data-driven starting point used when no warm start is supplied.
GPHyperparameters default_hyperparameters(const Dataset& data, const FitConfig& config);

// Multi-restart LML ascent. Datasets with fewer than two rows keep the defaults.
GPModel fit_gp(const Dataset& data, const FitConfig& config, RngSeed seed, FitReport* report = nullptr);

// Jitter ladder: 1e-8 * scale, times 10 per failure, up to 1e-2 * scale.
struct JitteredCholesky {
  Matrix lower;
  double jitter;
};
JitteredCholesky jittered_cholesky(const Matrix& a, double scale);

}  // namespace bolt
