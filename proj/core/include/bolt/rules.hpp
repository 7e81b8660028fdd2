#pragma once

#include <functional>
#include <optional>
#include <string>

#include "bolt/acquisition_function.hpp"
#include "bolt/lbfgsb.hpp"

namespace bolt {

struct OptimizerConfig {
  std::size_t num_presamples = 0;  // 0: 2000 * D, capped at 20000
  std::size_t num_starts = 8;
  std::size_t max_iterations = 100;
  double gradient_tolerance = 1e-8;
  std::size_t memory = 10;
  std::size_t num_threads = 1;  // 0: hardware concurrency

  std::size_t presamples_for(std::size_t dimension) const;
  void validate(std::size_t dimension) const;
};

struct OptimizationResult {
  Vector point;
  double value = 0.0;
  std::size_t starts_used = 0;
};

// Batched values for presample screening.
using BatchValue = std::function<Vector(const Matrix& points)>;

// Quasi-random screening followed by projected quasi-Newton ascent from the
// best presamples. Throws OptimizationError when every start is non-finite.
OptimizationResult optimize_acquisition(const BoxSpace& space, const ValueAndGradient& f, const OptimizerConfig& config,
                                        RngSeed seed, const BatchValue& batch = {});
OptimizationResult optimize_acquisition(const BoxSpace& space, const AcquisitionFunction& acquisition,
                                        const OptimizerConfig& config, RngSeed seed);

enum class TrustRegionPhase { global, local };

std::string to_string(TrustRegionPhase phase);
TrustRegionPhase trust_region_phase_from_string(const std::string& name);

struct TrustRegionState {
  TrustRegionPhase phase = TrustRegionPhase::global;
  Vector center;
  Vector size;  // halfwidths
  Vector initial_size;
  Vector min_size;
  double gamma_shrink = 0.5;
  double gamma_expand = 2.0;
  double best_seen = 0.0;

  friend bool operator==(const TrustRegionState& a, const TrustRegionState& b) {
    return a.phase == b.phase && a.center == b.center && a.size == b.size && a.initial_size == b.initial_size &&
           a.min_size == b.min_size && a.gamma_shrink == b.gamma_shrink && a.gamma_expand == b.gamma_expand &&
           a.best_seen == b.best_seen;
  }
};

TrustRegionState trego_initial_state(const BoxSpace& space, const Vector& best_point, double best_value);

// One transition of the automaton given the best value and point of the newest batch.
TrustRegionState trego_update(const TrustRegionState& state, const BoxSpace& space, double batch_best,
                              const Vector& batch_best_point);

// Box the next TREGO query is optimized over.
BoxSpace trego_region(const TrustRegionState& state, const BoxSpace& space);

enum class RuleKind { ego, batch_penalized, trego, thompson };

std::string to_string(RuleKind kind);
RuleKind rule_kind_from_string(const std::string& name);

struct RuleConfig {
  RuleKind kind = RuleKind::ego;
  std::size_t batch_size = 1;
  AcquisitionSpec acquisition;
  std::size_t candidate_count = 0;  // thompson; 0: 1000 * D, capped at 10000
  OptimizerConfig optimizer;

  std::size_t candidates_for(std::size_t dimension) const;
  void validate(std::size_t dimension) const;
};

// Greedy batch: the plain argmax, then the penalized argmax after each pick.
Matrix ego_step(const ModelMap& models, const TaggedDatasets& datasets, const BoxSpace& space,
                const RuleConfig& config, RngSeed seed);

Matrix thompson_step(const ProbabilisticModel& model, const BoxSpace& space, const RuleConfig& config, RngSeed seed);

struct TregoStep {
  Matrix points;
  TrustRegionState state;
};

// Queries over the region of `state`. The state is advanced by the loop once
// the evaluations are told, so it is returned unchanged here.
TregoStep trego_step(const ModelMap& models, const TaggedDatasets& datasets, const BoxSpace& space,
                     const TrustRegionState& state, const RuleConfig& config, RngSeed seed);

// Dispatch on config.kind. `trust_region` is required for trego.
Matrix recommend(const ModelMap& models, const TaggedDatasets& datasets, const BoxSpace& space,
                 const RuleConfig& config, const std::optional<TrustRegionState>& trust_region, RngSeed seed);

}  // namespace bolt
