#include "bolt/models.hpp"

#include <cmath>
#include <limits>

#include "bolt/error.hpp"
#include "bolt/lbfgsb.hpp"
#include "bolt/numerics.hpp"
#include "parallel.hpp"

namespace bolt {
namespace {

constexpr double kSqrt5 = 2.23606797749979;
constexpr double kLogBound = 20.0;

Matrix scaled(const Matrix& a, const Vector& lengthscales) {
  return a * lengthscales.cwiseInverse().asDiagonal();
}

// Pairwise squared distances between rows.
Matrix sq_distances(const Matrix& a, const Matrix& b) {
  Matrix d(a.rows(), b.rows());
  for (Eigen::Index j = 0; j < b.rows(); ++j) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) d(i, j) = (a.row(i) - b.row(j)).squaredNorm();
  }
  return d;
}

Vector data_range(const Dataset& data, const FitConfig& config) {
  const auto dim = static_cast<Eigen::Index>(data.input_dim());
  if (config.input_range) {
    if (config.input_range->size() != dim) throw DimensionError("input_range has the wrong dimension");
    return *config.input_range;
  }
  Vector range = Vector::Ones(dim);
  if (data.size() >= 2) {
    range = data.query_points().colwise().maxCoeff() - data.query_points().colwise().minCoeff();
    for (Eigen::Index d = 0; d < dim; ++d)
      if (!(range[d] > 0.0)) range[d] = 1.0;
  }
  return range;
}

struct Bounds {
  Vector lower;
  Vector upper;
};

Bounds parameter_bounds(const Vector& range, const FitConfig& config) {
  const auto dim = range.size();
  Bounds b{Vector(dim + 3), Vector(dim + 3)};
  b.lower[0] = -kLogBound;
  b.upper[0] = kLogBound;
  for (Eigen::Index d = 0; d < dim; ++d) {
    b.lower[1 + d] = std::log(1e-3 * range[d]);
    b.upper[1 + d] = std::log(10.0 * range[d]);
  }
  b.lower[1 + dim] = -std::numeric_limits<double>::infinity();
  b.upper[1 + dim] = std::numeric_limits<double>::infinity();
  if (config.fixed_noise_variance) {
    // Placeholder coordinate pinned at 0; the real value is substituted on unpack.
    b.lower[2 + dim] = 0.0;
    b.upper[2 + dim] = 0.0;
  } else {
    b.lower[2 + dim] = -kLogBound;
    b.upper[2 + dim] = kLogBound;
  }
  return b;
}

}  // namespace

std::string to_string(KernelFamily family) {
  return family == KernelFamily::squared_exponential ? "squared_exponential" : "matern52";
}

KernelFamily kernel_family_from_string(const std::string& name) {
  if (name == "squared_exponential" || name == "se" || name == "rbf") return KernelFamily::squared_exponential;
  if (name == "matern52" || name == "matern-5/2") return KernelFamily::matern52;
  throw ValidationError("unknown kernel family '" + name + "' (expected squared_exponential or matern52)", "family");
}

void Kernel::validate() const {
  if (!(variance > 0.0) || !std::isfinite(variance)) throw ValidationError("kernel variance must be positive", "variance");
  if (lengthscales.size() == 0) throw ValidationError("kernel needs at least one lengthscale", "lengthscales");
  for (Eigen::Index i = 0; i < lengthscales.size(); ++i) {
    if (!(lengthscales[i] > 0.0) || !std::isfinite(lengthscales[i])) {
      throw ValidationError("lengthscale " + std::to_string(i) + " must be positive",
                            "lengthscales[" + std::to_string(i) + "]");
    }
  }
}

double Kernel::from_scaled_sq_distance(double r2) const noexcept {
  if (family == KernelFamily::squared_exponential) return variance * std::exp(-0.5 * r2);
  const double r = std::sqrt(r2);
  return variance * (1.0 + kSqrt5 * r + 5.0 / 3.0 * r2) * std::exp(-kSqrt5 * r);
}

double Kernel::radial_derivative(double r2) const noexcept {
  if (family == KernelFamily::squared_exponential) return variance * std::exp(-0.5 * r2);
  const double r = std::sqrt(r2);
  return variance * 5.0 / 3.0 * (1.0 + kSqrt5 * r) * std::exp(-kSqrt5 * r);
}

double Kernel::operator()(const Vector& a, const Vector& b) const {
  if (a.size() != lengthscales.size() || b.size() != lengthscales.size()) {
    throw DimensionError("kernel expects inputs of dimension " + std::to_string(lengthscales.size()));
  }
  return from_scaled_sq_distance((a - b).cwiseQuotient(lengthscales).squaredNorm());
}

Matrix kernel_matrix(const Kernel& k, const Matrix& a, const Matrix& b) {
  const auto dim = k.lengthscales.size();
  if (a.cols() != dim || b.cols() != dim) {
    throw DimensionError("kernel_matrix expects " + std::to_string(dim) + " columns, got " +
                         std::to_string(a.cols()) + " and " + std::to_string(b.cols()));
  }
  Matrix r2 = sq_distances(scaled(a, k.lengthscales), scaled(b, k.lengthscales));
  return r2.unaryExpr([&k](double v) { return k.from_scaled_sq_distance(v); });
}

void GPHyperparameters::validate() const {
  kernel.validate();
  if (!std::isfinite(mean)) throw ValidationError("mean must be finite", "mean");
  if (!(noise_variance >= 0.0) || !std::isfinite(noise_variance)) {
    throw ValidationError("noise_variance must be non-negative", "noise_variance");
  }
}

JitteredCholesky jittered_cholesky(const Matrix& a, double scale) {
  const Eigen::Index n = a.rows();
  double jitter = 1e-8 * scale;
  const double max_jitter = 1e-2 * scale * (1.0 + 1e-9);
  while (true) {
    Matrix shifted = a;
    shifted.diagonal().array() += jitter;
    Eigen::LLT<Matrix> llt(shifted);
    if (llt.info() == Eigen::Success) {
      Matrix lower = llt.matrixL();
      if (lower.diagonal().allFinite() && (n == 0 || lower.diagonal().minCoeff() > 0.0)) return {std::move(lower), jitter};
    }
    if (jitter * 10.0 > max_jitter) {
      throw NotPositiveDefiniteError("matrix is not positive definite after jitter " + std::to_string(jitter), jitter);
    }
    jitter *= 10.0;
  }
}

GPModel::GPModel(GPHyperparameters hyperparameters, Dataset training_data, FitConfig fit_config)
    : hp_(std::move(hyperparameters)), data_(std::move(training_data)), fit_config_(std::move(fit_config)) {
  hp_.validate();
  if (data_.output_dim() != 1) {
    throw DimensionError("GP training data needs exactly one output column, got " + std::to_string(data_.output_dim()));
  }
  check_input(static_cast<Eigen::Index>(data_.input_dim()));
  if (data_.empty()) {
    chol_ = Matrix(0, 0);
    alpha_ = Vector(0);
    return;
  }
  Matrix k = kernel_matrix(hp_.kernel, data_.query_points(), data_.query_points());
  k.diagonal().array() += hp_.noise_variance;
  auto factor = jittered_cholesky(k, hp_.kernel.variance);
  chol_ = std::move(factor.lower);
  jitter_ = factor.jitter;
  const Vector residual = data_.observations().col(0).array() - hp_.mean;
  alpha_ = chol_.triangularView<Eigen::Lower>().solve(residual);
  chol_.triangularView<Eigen::Lower>().transpose().solveInPlace(alpha_);
}

void GPModel::check_input(Eigen::Index cols) const {
  if (cols != static_cast<Eigen::Index>(hp_.kernel.input_dim())) {
    throw DimensionError("model expects inputs of dimension " + std::to_string(hp_.kernel.input_dim()) + ", got " +
                         std::to_string(cols));
  }
}

PosteriorPrediction GPModel::predict(const Matrix& x) const {
  check_input(x.cols());
  PosteriorPrediction out{Vector::Constant(x.rows(), hp_.mean), Vector::Constant(x.rows(), hp_.kernel.variance)};
  if (data_.empty()) return out;
  const Matrix kxs = kernel_matrix(hp_.kernel, data_.query_points(), x);
  out.mean.array() += (kxs.transpose() * alpha_).array();
  const Matrix v = chol_.triangularView<Eigen::Lower>().solve(kxs);
  out.variance.array() -= v.colwise().squaredNorm().transpose().array();
  out.variance = out.variance.cwiseMax(0.0);
  return out;
}

JointPrediction GPModel::predict_joint(const Matrix& x) const {
  check_input(x.cols());
  JointPrediction out{Vector::Constant(x.rows(), hp_.mean), kernel_matrix(hp_.kernel, x, x)};
  if (!data_.empty()) {
    const Matrix kxs = kernel_matrix(hp_.kernel, data_.query_points(), x);
    out.mean.array() += (kxs.transpose() * alpha_).array();
    const Matrix v = chol_.triangularView<Eigen::Lower>().solve(kxs);
    out.covariance.noalias() -= v.transpose() * v;
  }
  out.covariance = 0.5 * (out.covariance + out.covariance.transpose());
  for (Eigen::Index i = 0; i < out.covariance.rows(); ++i) {
    if (out.covariance(i, i) < 0.0) out.covariance(i, i) = 0.0;
  }
  return out;
}

PointPosterior GPModel::predict_with_gradient(const Vector& x) const {
  check_input(x.size());
  const auto dim = x.size();
  PointPosterior out{hp_.mean, hp_.kernel.variance, Vector::Zero(dim), Vector::Zero(dim)};
  if (data_.empty()) return out;
  const auto n = static_cast<Eigen::Index>(data_.size());
  const Matrix& train = data_.query_points();
  const Vector inv_l2 = hp_.kernel.lengthscales.array().square().inverse();
  Vector kx(n);
  Matrix dk(n, dim);  // dk(x, X_i)/dx
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vector diff = x - train.row(i).transpose();
    const double r2 = diff.cwiseProduct(inv_l2).dot(diff);
    kx[i] = hp_.kernel.from_scaled_sq_distance(r2);
    dk.row(i) = (-hp_.kernel.radial_derivative(r2) * diff.cwiseProduct(inv_l2)).transpose();
  }
  out.mean += kx.dot(alpha_);
  out.mean_gradient = dk.transpose() * alpha_;
  Vector v = chol_.triangularView<Eigen::Lower>().solve(kx);
  const double var = hp_.kernel.variance - v.squaredNorm();
  if (var <= 0.0) {
    out.variance = 0.0;
    return out;
  }
  out.variance = var;
  chol_.triangularView<Eigen::Lower>().transpose().solveInPlace(v);
  out.variance_gradient = -2.0 * (dk.transpose() * v);
  return out;
}

Matrix GPModel::sample(const Matrix& x, std::size_t count, RngSeed seed) const {
  if (count == 0) throw ValidationError("sample count must be at least 1", "count");
  auto joint = predict_joint(x);
  const Eigen::Index q = x.rows();
  Matrix out(static_cast<Eigen::Index>(count), q);
  out.rowwise() = joint.mean.transpose();
  const double scale = q > 0 ? joint.covariance.diagonal().maxCoeff() : 0.0;
  if (!(scale > 0.0)) return out;
  const auto factor = jittered_cholesky(joint.covariance, scale);
  Rng rng(seed);
  Vector z(q);
  for (Eigen::Index s = 0; s < out.rows(); ++s) {
    for (Eigen::Index j = 0; j < q; ++j) z[j] = rng.normal();
    out.row(s) += (factor.lower.triangularView<Eigen::Lower>() * z).transpose();
  }
  return out;
}

std::shared_ptr<const ProbabilisticModel> GPModel::fit(const Dataset& data, RngSeed seed) const {
  FitConfig config = fit_config_;
  config.family = hp_.kernel.family;
  config.initial = hp_;
  return std::make_shared<GPModel>(fit_gp(data, config, seed));
}

LmlResult log_marginal_likelihood(const GPHyperparameters& hp, const Dataset& data) {
  hp.validate();
  if (data.empty()) throw ValidationError("log marginal likelihood needs at least one observation");
  if (data.output_dim() != 1) throw DimensionError("log marginal likelihood needs a single output column");
  const auto dim = static_cast<Eigen::Index>(hp.kernel.input_dim());
  if (static_cast<Eigen::Index>(data.input_dim()) != dim) throw DimensionError("data and kernel dimensions differ");

  const auto n = static_cast<Eigen::Index>(data.size());
  const Matrix& x = data.query_points();
  const Matrix r2 = sq_distances(scaled(x, hp.kernel.lengthscales), scaled(x, hp.kernel.lengthscales));
  const Matrix kf = r2.unaryExpr([&hp](double v) { return hp.kernel.from_scaled_sq_distance(v); });
  Matrix k = kf;
  k.diagonal().array() += hp.noise_variance;
  const auto factor = jittered_cholesky(k, hp.kernel.variance);
  const auto& lower = factor.lower;

  const Vector residual = data.observations().col(0).array() - hp.mean;
  Vector alpha = lower.triangularView<Eigen::Lower>().solve(residual);
  lower.triangularView<Eigen::Lower>().transpose().solveInPlace(alpha);

  LmlResult result;
  result.jitter = factor.jitter;
  result.value = -0.5 * residual.dot(alpha) - lower.diagonal().array().log().sum() -
                 0.5 * static_cast<double>(n) * numerics::kLog2Pi;

  Matrix k_inv = Matrix::Identity(n, n);
  lower.triangularView<Eigen::Lower>().solveInPlace(k_inv);
  lower.triangularView<Eigen::Lower>().transpose().solveInPlace(k_inv);
  const Matrix w = alpha * alpha.transpose() - k_inv;

  result.gradient = Vector::Zero(dim + 3);
  // The jitter scales with v, so it belongs to dK/dlog v.
  result.gradient[0] = 0.5 * (w.cwiseProduct(kf).sum() + factor.jitter * w.trace());
  const Matrix g = r2.unaryExpr([&hp](double v) { return hp.kernel.radial_derivative(v); });
  for (Eigen::Index d = 0; d < dim; ++d) {
    const double inv_l2 = 1.0 / (hp.kernel.lengthscales[d] * hp.kernel.lengthscales[d]);
    double acc = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      for (Eigen::Index i = 0; i < n; ++i) {
        const double diff = x(i, d) - x(j, d);
        acc += w(i, j) * g(i, j) * diff * diff * inv_l2;
      }
    }
    result.gradient[1 + d] = 0.5 * acc;
  }
  result.gradient[1 + dim] = alpha.sum();
  result.gradient[2 + dim] = 0.5 * hp.noise_variance * w.trace();
  return result;
}

Vector pack_hyperparameters(const GPHyperparameters& hp) {
  const auto dim = hp.kernel.lengthscales.size();
  Vector theta(dim + 3);
  theta[0] = std::log(hp.kernel.variance);
  theta.segment(1, dim) = hp.kernel.lengthscales.array().log();
  theta[1 + dim] = hp.mean;
  theta[2 + dim] = std::log(hp.noise_variance);
  return theta;
}

GPHyperparameters unpack_hyperparameters(const Vector& theta, KernelFamily family) {
  const auto dim = theta.size() - 3;
  GPHyperparameters hp;
  hp.kernel.family = family;
  hp.kernel.variance = std::exp(theta[0]);
  hp.kernel.lengthscales = theta.segment(1, dim).array().exp();
  hp.mean = theta[1 + dim];
  hp.noise_variance = std::exp(theta[2 + dim]);
  return hp;
}

GPHyperparameters default_hyperparameters(const Dataset& data, const FitConfig& config) {
  const Vector range = data_range(data, config);
  GPHyperparameters hp;
  hp.kernel.family = config.family;
  hp.kernel.lengthscales = 0.5 * range;
  double variance = 0.0;
  if (!data.empty()) {
    const auto y = data.observations().col(0);
    hp.mean = y.mean();
    variance = (y.array() - hp.mean).square().mean();
  }
  hp.kernel.variance = variance > 1e-12 ? variance : 1.0;
  hp.noise_variance = config.fixed_noise_variance ? *config.fixed_noise_variance : 1e-2 * hp.kernel.variance;
  return hp;
}

GPModel fit_gp(const Dataset& data, const FitConfig& config, RngSeed seed, FitReport* report) {
  if (data.output_dim() != 1) throw DimensionError("GP fitting needs a single output column");
  GPHyperparameters base = config.initial ? *config.initial : default_hyperparameters(data, config);
  base.kernel.family = config.family;
  if (config.fixed_noise_variance) base.noise_variance = *config.fixed_noise_variance;
  if (data.size() < 2) {
    if (report) *report = FitReport{{}, 0, true};
    return GPModel(base, data, config);
  }

  const Vector range = data_range(data, config);
  const Bounds bounds = parameter_bounds(range, config);
  const auto dim = static_cast<Eigen::Index>(data.input_dim());
  const Eigen::Index noise_index = 2 + dim;

  auto params_to_hp = [&](const Vector& theta) {
    GPHyperparameters hp = unpack_hyperparameters(theta, config.family);
    if (config.fixed_noise_variance) hp.noise_variance = *config.fixed_noise_variance;
    return hp;
  };
  auto objective = [&](const Vector& theta, Vector& grad) {
    try {
      auto lml = log_marginal_likelihood(params_to_hp(theta), data);
      grad = lml.gradient;
      if (config.fixed_noise_variance) grad[noise_index] = 0.0;
      return lml.value;
    } catch (const NotPositiveDefiniteError&) {
      grad = Vector::Zero(theta.size());
      return -std::numeric_limits<double>::infinity();
    }
  };

  Vector start = pack_hyperparameters(base);
  if (config.fixed_noise_variance) start[noise_index] = 0.0;

  const std::size_t restarts = std::max<std::size_t>(1, config.restarts);
  std::vector<Vector> starts(restarts, start);
  for (std::size_t r = 1; r < restarts; ++r) {
    Rng rng(derive_seed(seed, r));
    starts[r][0] += config.perturbation_sd * rng.normal();
    for (Eigen::Index d = 0; d < dim; ++d) starts[r][1 + d] += config.perturbation_sd * rng.normal();
    if (!config.fixed_noise_variance) starts[r][noise_index] += config.perturbation_sd * rng.normal();
  }

  BoxMinimizerOptions options;
  options.max_iterations = config.max_iterations;
  options.gradient_tolerance = config.gradient_tolerance;
  std::vector<RestartOutcome> outcomes(restarts);
  std::vector<Vector> finals(restarts);
  detail::parallel_for(restarts, config.num_threads, [&](std::size_t r) {
    Vector x0 = starts[r].cwiseMax(bounds.lower).cwiseMin(bounds.upper);
    Vector g0;
    const double initial = objective(x0, g0);
    if (!std::isfinite(initial)) return;
    auto res = maximize_in_box(objective, x0, bounds.lower, bounds.upper, options);
    outcomes[r] = {true, initial, res.value};
    finals[r] = res.x;
  });

  std::optional<std::size_t> best;
  for (std::size_t r = 0; r < restarts; ++r) {
    if (outcomes[r].succeeded && (!best || outcomes[r].final_lml > outcomes[*best].final_lml)) best = r;
  }
  if (!best) {
    throw NotPositiveDefiniteError("every hyperparameter restart failed to factorize the Gram matrix",
                                   1e-2 * base.kernel.variance);
  }
  if (report) *report = FitReport{outcomes, *best, false};
  return GPModel(params_to_hp(finals[*best]), data, config);
}

}  // namespace bolt
