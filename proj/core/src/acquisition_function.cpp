#include "bolt/acquisition_function.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bolt/error.hpp"
#include "bolt/numerics.hpp"

namespace bolt {
namespace {

std::shared_ptr<const ProbabilisticModel> require_model(const ModelMap& models, const std::string& tag) {
  auto it = models.find(tag);
  if (it == models.end() || !it->second) {
    throw ConfigError("acquisition needs a model for tag '" + tag + "'", tag);
  }
  return it->second;
}

const Dataset& require_data(const TaggedDatasets& datasets, const std::string& tag) {
  if (!datasets.contains(tag)) throw ConfigError("acquisition needs observations for tag '" + tag + "'", tag);
  const Dataset& ds = datasets.at(tag);
  if (ds.empty()) throw ConfigError("acquisition needs at least one observation for tag '" + tag + "'", tag);
  return ds;
}

Vector chain(const acquisition::Scalar& s, const PointPosterior& p) {
  return s.d_mean * p.mean_gradient + s.d_variance * p.variance_gradient;
}

}  // namespace

const std::vector<std::string>& acquisition_names() {
  static const std::vector<std::string> names{"ei", "aei", "nlcb", "cei", "ef", "var", "ehvi", "thompson"};
  return names;
}

std::vector<std::string> required_tags(const AcquisitionSpec& spec) {
  if (spec.name == "ehvi") return spec.objective_tags;
  if (spec.name == "cei") {
    std::vector<std::string> tags{spec.objective_tag};
    tags.insert(tags.end(), spec.constraint_tags.begin(), spec.constraint_tags.end());
    return tags;
  }
  return {spec.objective_tag};
}

Vector AcquisitionFunction::evaluate(const Matrix& x) const {
  Vector out(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) out[i] = value(x.row(i).transpose());
  return out;
}

MarginalAcquisition::MarginalAcquisition(std::shared_ptr<const ProbabilisticModel> model, Form form)
    : model_(std::move(model)), form_(std::move(form)) {}

double MarginalAcquisition::value_and_gradient(const Vector& x, Vector& gradient) const {
  const PointPosterior p = model_->predict_with_gradient(x);
  const auto s = form_(p.mean, p.variance);
  gradient = chain(s, p);
  return s.value;
}

Vector MarginalAcquisition::evaluate(const Matrix& x) const {
  const auto p = model_->predict(x);
  Vector out(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) out[i] = form_(p.mean[i], p.variance[i]).value;
  return out;
}

ConstrainedExpectedImprovement::ConstrainedExpectedImprovement(
    std::shared_ptr<const ProbabilisticModel> objective, std::vector<std::shared_ptr<const ProbabilisticModel>> constraints,
    std::optional<double> feasible_incumbent, double threshold)
    : objective_(std::move(objective)),
      constraints_(std::move(constraints)),
      incumbent_(feasible_incumbent),
      threshold_(threshold) {}

double ConstrainedExpectedImprovement::value_and_gradient(const Vector& x, Vector& gradient) const {
  double value = 1.0;
  gradient = Vector::Zero(x.size());
  if (incumbent_) {
    const auto p = objective_->predict_with_gradient(x);
    const auto ei = acquisition::expected_improvement(p.mean, p.variance, *incumbent_);
    value = ei.value;
    gradient = chain(ei, p);
  }
  for (const auto& c : constraints_) {
    const auto p = c->predict_with_gradient(x);
    const auto pof = acquisition::probability_of_feasibility(p.mean, p.variance, threshold_);
    gradient = gradient * pof.value + value * chain(pof, p);
    value *= pof.value;
  }
  return value;
}

Vector ConstrainedExpectedImprovement::evaluate(const Matrix& x) const {
  Vector out = Vector::Ones(x.rows());
  if (incumbent_) {
    const auto p = objective_->predict(x);
    for (Eigen::Index i = 0; i < x.rows(); ++i)
      out[i] = acquisition::expected_improvement(p.mean[i], p.variance[i], *incumbent_).value;
  }
  for (const auto& c : constraints_) {
    const auto p = c->predict(x);
    for (Eigen::Index i = 0; i < x.rows(); ++i)
      out[i] *= acquisition::probability_of_feasibility(p.mean[i], p.variance[i], threshold_).value;
  }
  return out;
}

ExpectedHypervolumeImprovement::ExpectedHypervolumeImprovement(std::shared_ptr<const ProbabilisticModel> first,
                                                               std::shared_ptr<const ProbabilisticModel> second,
                                                               acquisition::ParetoFront front, std::size_t samples,
                                                               RngSeed seed)
    : first_(std::move(first)), second_(std::move(second)), front_(std::move(front)) {
  if (samples == 0) throw ConfigError("ehvi needs at least one Monte-Carlo sample", "mc_samples");
  Rng rng(seed);
  normals_.resize(static_cast<Eigen::Index>(samples), 2);
  for (Eigen::Index s = 0; s < normals_.rows(); ++s) {
    normals_(s, 0) = rng.normal();
    normals_(s, 1) = rng.normal();
  }
}

double ExpectedHypervolumeImprovement::value_and_gradient(const Vector& x, Vector& gradient) const {
  const auto p0 = first_->predict_with_gradient(x);
  const auto p1 = second_->predict_with_gradient(x);
  Vector mean(2);
  mean << p0.mean, p1.mean;
  Vector variance(2);
  variance << p0.variance, p1.variance;
  const auto r = acquisition::ehvi_mc_independent(mean, variance, front_, normals_);
  gradient = r.d_mean[0] * p0.mean_gradient + r.d_variance[0] * p0.variance_gradient + r.d_mean[1] * p1.mean_gradient +
             r.d_variance[1] * p1.variance_gradient;
  return r.value;
}

PenalizedAcquisition::PenalizedAcquisition(std::shared_ptr<const AcquisitionFunction> base,
                                           acquisition::PenalizationState state)
    : base_(std::move(base)), state_(std::move(state)) {}

double PenalizedAcquisition::value_and_gradient(const Vector& x, Vector& gradient) const {
  Vector base_gradient;
  const double a = base_->value_and_gradient(x, base_gradient);
  double log_softplus = 0.0;
  double d_log_softplus = 0.0;
  if (a < -30.0) {
    log_softplus = a;
    d_log_softplus = 1.0;
  } else {
    const double sp = numerics::softplus(a);
    log_softplus = std::log(sp);
    d_log_softplus = numerics::sigmoid(a) / sp;
  }
  Vector penalty_gradient;
  const double log_penalty = acquisition::log_penalization(x, state_, &penalty_gradient);
  gradient = d_log_softplus * base_gradient + penalty_gradient;
  return log_softplus + log_penalty;
}

double PenalizedAcquisition::penalized_value(const Vector& x) const {
  Vector g;
  return std::exp(value_and_gradient(x, g));
}

std::optional<double> feasible_incumbent(const TaggedDatasets& datasets, const AcquisitionSpec& spec) {
  if (!datasets.contains(spec.objective_tag)) return std::nullopt;
  const Dataset& objective = datasets.at(spec.objective_tag);
  std::optional<double> best;
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(objective.size()); ++i) {
    bool feasible = true;
    for (const auto& tag : spec.constraint_tags) {
      if (!datasets.contains(tag)) continue;
      const Dataset& c = datasets.at(tag);
      if (i >= static_cast<Eigen::Index>(c.size()) || !(c.observations().row(i).array() <= spec.constraint_threshold).all()) {
        feasible = false;
        break;
      }
    }
    if (feasible && (!best || objective.observations()(i, 0) < *best)) best = objective.observations()(i, 0);
  }
  return best;
}

double noisy_incumbent(const ProbabilisticModel& model, const Dataset& data) {
  const auto p = model.predict(data.query_points());
  return (p.mean.array() + p.variance.array().sqrt()).minCoeff();
}

Vector default_reference_point(const Matrix& observations) {
  if (observations.rows() == 0) throw ConfigError("cannot derive a reference point without observations", "reference");
  const Vector hi = observations.colwise().maxCoeff();
  const Vector lo = observations.colwise().minCoeff();
  return hi + 0.1 * (hi - lo).cwiseMax(1e-6);
}

Matrix objective_matrix(const TaggedDatasets& datasets, const std::vector<std::string>& tags) {
  if (tags.size() != 2) throw ConfigError("ehvi needs exactly two objective tags", "objective_tags");
  const Dataset& a = require_data(datasets, tags[0]);
  const Dataset& b = require_data(datasets, tags[1]);
  if (a.size() != b.size()) throw ValidationError("objective datasets have different row counts", tags[1]);
  Matrix out(static_cast<Eigen::Index>(a.size()), 2);
  out.col(0) = a.observations().col(0);
  out.col(1) = b.observations().col(0);
  return out;
}

std::shared_ptr<const AcquisitionFunction> build_acquisition(const AcquisitionSpec& spec, const ModelMap& models,
                                                             const TaggedDatasets& datasets, RngSeed seed) {
  using acquisition::Scalar;
  const std::string& name = spec.name;
  if (name == "ei") {
    auto model = require_model(models, spec.objective_tag);
    const double incumbent = best_observation(require_data(datasets, spec.objective_tag)).value;
    return std::make_shared<MarginalAcquisition>(model, [incumbent](double m, double v) {
      return acquisition::expected_improvement(m, v, incumbent);
    });
  }
  if (name == "aei") {
    auto model = require_model(models, spec.objective_tag);
    const double incumbent = noisy_incumbent(*model, require_data(datasets, spec.objective_tag));
    const double noise = model->observation_noise_variance();
    return std::make_shared<MarginalAcquisition>(model, [incumbent, noise](double m, double v) {
      return acquisition::augmented_expected_improvement(m, v, noise, incumbent);
    });
  }
  if (name == "nlcb") {
    if (!(spec.beta >= 0.0)) throw ConfigError("beta must be non-negative", "beta");
    const double beta = spec.beta;
    return std::make_shared<MarginalAcquisition>(require_model(models, spec.objective_tag), [beta](double m, double v) {
      return acquisition::negative_lower_confidence_bound(m, v, beta);
    });
  }
  if (name == "var") {
    return std::make_shared<MarginalAcquisition>(require_model(models, spec.objective_tag),
                                                 [](double m, double v) { return acquisition::predictive_variance(m, v); });
  }
  if (name == "ef") {
    if (!(spec.alpha > 0.0)) throw ConfigError("alpha must be positive", "alpha");
    const acquisition::LevelSetConfig cfg{spec.level, spec.alpha};
    return std::make_shared<MarginalAcquisition>(require_model(models, spec.objective_tag), [cfg](double m, double v) {
      return acquisition::expected_feasibility(m, v, cfg);
    });
  }
  if (name == "cei") {
    auto objective = require_model(models, spec.objective_tag);
    require_data(datasets, spec.objective_tag);
    std::vector<std::shared_ptr<const ProbabilisticModel>> constraints;
    for (const auto& tag : spec.constraint_tags) {
      constraints.push_back(require_model(models, tag));
      require_data(datasets, tag);
    }
    return std::make_shared<ConstrainedExpectedImprovement>(objective, std::move(constraints),
                                                            feasible_incumbent(datasets, spec), spec.constraint_threshold);
  }
  if (name == "ehvi") {
    const Matrix obs = objective_matrix(datasets, spec.objective_tags);
    const Vector reference = spec.reference ? *spec.reference : default_reference_point(obs);
    return std::make_shared<ExpectedHypervolumeImprovement>(
        require_model(models, spec.objective_tags[0]), require_model(models, spec.objective_tags[1]),
        acquisition::pareto_front(obs, reference), spec.mc_samples, seed);
  }
  if (name == "thompson") {
    throw ConfigError("'thompson' is a sampling rule, not a continuous acquisition; use the thompson rule", "acquisition");
  }
  throw ConfigError("unknown acquisition '" + name + "'", "acquisition");
}

}  // namespace bolt
