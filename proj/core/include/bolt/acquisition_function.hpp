#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "bolt/acquisition.hpp"
#include "bolt/data.hpp"
#include "bolt/models.hpp"

namespace bolt {

using ModelMap = std::map<std::string, std::shared_ptr<const ProbabilisticModel>, std::less<>>;

// Acquisition selection and its constants. Names: ei, aei, nlcb, cei, ef, var, ehvi, thompson.
struct AcquisitionSpec {
  std::string name = "ei";
  double beta = 1.96;
  double level = 0.0;                 // ef: target level t
  double alpha = 2.0;                 // ef: band scale
  double constraint_threshold = 0.0;  // cei: feasible iff constraint <= threshold
  std::size_t mc_samples = 4096;      // ehvi
  std::optional<Vector> reference;    // ehvi: defaults to a margin beyond the observed maxima
  std::string objective_tag = std::string(kObjectiveTag);
  std::vector<std::string> constraint_tags = {std::string(kConstraintTag)};
  std::vector<std::string> objective_tags = {"OBJECTIVE_1", "OBJECTIVE_2"};
};

const std::vector<std::string>& acquisition_names();

// Tags whose models the acquisition consumes.
std::vector<std::string> required_tags(const AcquisitionSpec& spec);

// A function on the search space to be maximized.
class AcquisitionFunction {
 public:
  virtual ~AcquisitionFunction() = default;

  virtual double value_and_gradient(const Vector& x, Vector& gradient) const = 0;

  virtual double value(const Vector& x) const {
    Vector g;
    return value_and_gradient(x, g);
  }

  // Values at the rows of x.
  virtual Vector evaluate(const Matrix& x) const;
};

// Acquisition a(mean(x), variance(x)) of a single model.
class MarginalAcquisition final : public AcquisitionFunction {
 public:
  using Form = std::function<acquisition::Scalar(double mean, double variance)>;

  MarginalAcquisition(std::shared_ptr<const ProbabilisticModel> model, Form form);

  double value_and_gradient(const Vector& x, Vector& gradient) const override;
  Vector evaluate(const Matrix& x) const override;

 private:
  std::shared_ptr<const ProbabilisticModel> model_;
  Form form_;
};

// EI(x) * prod_c PoF_c(x); prod_c PoF_c(x) alone while nothing feasible is observed.
class ConstrainedExpectedImprovement final : public AcquisitionFunction {
 public:
  ConstrainedExpectedImprovement(std::shared_ptr<const ProbabilisticModel> objective,
                                 std::vector<std::shared_ptr<const ProbabilisticModel>> constraints,
                                 std::optional<double> feasible_incumbent, double threshold);

  double value_and_gradient(const Vector& x, Vector& gradient) const override;
  Vector evaluate(const Matrix& x) const override;

 private:
  std::shared_ptr<const ProbabilisticModel> objective_;
  std::vector<std::shared_ptr<const ProbabilisticModel>> constraints_;
  std::optional<double> incumbent_;
  double threshold_;
};

// Monte-Carlo EHVI over two independent models with fixed base samples.
class ExpectedHypervolumeImprovement final : public AcquisitionFunction {
 public:
  ExpectedHypervolumeImprovement(std::shared_ptr<const ProbabilisticModel> first,
                                 std::shared_ptr<const ProbabilisticModel> second, acquisition::ParetoFront front,
                                 std::size_t samples, RngSeed seed);

  double value_and_gradient(const Vector& x, Vector& gradient) const override;

  const acquisition::ParetoFront& front() const noexcept { return front_; }

 private:
  std::shared_ptr<const ProbabilisticModel> first_;
  std::shared_ptr<const ProbabilisticModel> second_;
  acquisition::ParetoFront front_;
  Matrix normals_;
};

// log softplus(base(x)) + sum_j log psi_j(x).
class PenalizedAcquisition final : public AcquisitionFunction {
 public:
  PenalizedAcquisition(std::shared_ptr<const AcquisitionFunction> base, acquisition::PenalizationState state);

  double value_and_gradient(const Vector& x, Vector& gradient) const override;

  // exp of the log-space value: softplus(base(x)) * prod_j psi_j(x).
  double penalized_value(const Vector& x) const;
  const acquisition::PenalizationState& state() const noexcept { return state_; }

 private:
  std::shared_ptr<const AcquisitionFunction> base_;
  acquisition::PenalizationState state_;
};

// Builds the named acquisition. Incumbents come from `datasets` (minimization).
std::shared_ptr<const AcquisitionFunction> build_acquisition(const AcquisitionSpec& spec, const ModelMap& models,
                                                             const TaggedDatasets& datasets, RngSeed seed);

// Incumbent conventions shared with reporting.
std::optional<double> feasible_incumbent(const TaggedDatasets& datasets, const AcquisitionSpec& spec);
double noisy_incumbent(const ProbabilisticModel& model, const Dataset& data);
Vector default_reference_point(const Matrix& observations);

// Joined observation columns of the two objective tags (N x 2).
Matrix objective_matrix(const TaggedDatasets& datasets, const std::vector<std::string>& tags);

}  // namespace bolt
