#include "bolt/rules.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "bolt/error.hpp"
#include "parallel.hpp"

namespace bolt {
namespace {

constexpr std::uint64_t kLipschitzStream = 0x4C495053ULL;
constexpr std::size_t kLipschitzPoints = 500;

}  // namespace

std::size_t OptimizerConfig::presamples_for(std::size_t dimension) const {
  if (num_presamples != 0) return num_presamples;
  return std::min<std::size_t>(2000 * dimension, 20000);
}

void OptimizerConfig::validate(std::size_t dimension) const {
  if (num_starts < 1) throw ConfigError("optimizer needs at least one start", "num_starts");
  if (presamples_for(dimension) < num_starts)
    throw ConfigError("num_presamples must be at least num_starts", "num_presamples");
  if (memory < 1) throw ConfigError("quasi-Newton memory must be at least 1", "memory");
  if (!(gradient_tolerance > 0.0)) throw ConfigError("gradient_tolerance must be positive", "gradient_tolerance");
}

OptimizationResult optimize_acquisition(const BoxSpace& space, const ValueAndGradient& f, const OptimizerConfig& config,
                                        RngSeed seed, const BatchValue& batch) {
  const std::size_t dim = space.dimension();
  config.validate(dim);
  const std::size_t n = config.presamples_for(dim);
  const Matrix candidates = space.sample(n, SampleMode::quasirandom, seed);

  Vector values;
  if (batch) {
    values = batch(candidates);
  } else {
    values.resize(candidates.rows());
    Vector g;
    for (Eigen::Index i = 0; i < candidates.rows(); ++i) values[i] = f(candidates.row(i).transpose(), g);
  }

  std::vector<std::size_t> order;
  order.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    if (std::isfinite(values[static_cast<Eigen::Index>(i)])) order.push_back(i);
  if (order.empty()) throw OptimizationError("acquisition is non-finite at every presample");
  const std::size_t starts = std::min(config.num_starts, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(starts), order.end(),
                    [&](std::size_t a, std::size_t b) {
                      const double va = values[static_cast<Eigen::Index>(a)];
                      const double vb = values[static_cast<Eigen::Index>(b)];
                      return va > vb || (va == vb && a < b);
                    });

  BoxMinimizerOptions options;
  options.memory = config.memory;
  options.max_iterations = config.max_iterations;
  options.gradient_tolerance = config.gradient_tolerance;

  std::vector<std::optional<BoxMinimizerResult>> results(starts);
  detail::parallel_for(starts, config.num_threads, [&](std::size_t s) {
    const Vector x0 = candidates.row(static_cast<Eigen::Index>(order[s])).transpose();
    try {
      auto r = maximize_in_box(f, x0, space.lower(), space.upper(), options);
      if (std::isfinite(r.value)) results[s] = std::move(r);
    } catch (const OptimizationError&) {
    }
  });

  OptimizationResult best;
  bool found = false;
  for (std::size_t s = 0; s < starts; ++s) {
    if (!results[s]) continue;
    ++best.starts_used;
    if (!found || results[s]->value > best.value) {
      best.point = space.clip(results[s]->x);
      best.value = results[s]->value;
      found = true;
    }
  }
  if (!found) throw OptimizationError("every optimizer start was discarded");
  return best;
}

OptimizationResult optimize_acquisition(const BoxSpace& space, const AcquisitionFunction& acquisition,
                                        const OptimizerConfig& config, RngSeed seed) {
  return optimize_acquisition(
      space, [&](const Vector& x, Vector& g) { return acquisition.value_and_gradient(x, g); }, config, seed,
      [&](const Matrix& x) { return acquisition.evaluate(x); });
}

std::string to_string(TrustRegionPhase phase) { return phase == TrustRegionPhase::global ? "global" : "local"; }

TrustRegionPhase trust_region_phase_from_string(const std::string& name) {
  if (name == "global") return TrustRegionPhase::global;
  if (name == "local") return TrustRegionPhase::local;
  throw ValidationError("unknown trust-region phase '" + name + "'", "phase");
}

TrustRegionState trego_initial_state(const BoxSpace& space, const Vector& best_point, double best_value) {
  TrustRegionState s;
  s.phase = TrustRegionPhase::global;
  s.center = space.clip(best_point);
  s.initial_size = 0.25 * space.width();
  s.size = s.initial_size;
  s.min_size = 1e-3 * space.width();
  s.best_seen = best_value;
  return s;
}

TrustRegionState trego_update(const TrustRegionState& state, const BoxSpace& space, double batch_best,
                              const Vector& batch_best_point) {
  TrustRegionState next = state;
  if (batch_best < state.best_seen - 1e-12) {
    next.size = (state.gamma_expand * state.size).cwiseMin(space.width());
    next.center = space.clip(batch_best_point);
    next.best_seen = batch_best;
    next.phase = TrustRegionPhase::local;
    return next;
  }
  if (state.phase == TrustRegionPhase::global) {
    next.phase = TrustRegionPhase::local;
    return next;
  }
  next.size = state.gamma_shrink * state.size;
  if ((next.size.array() < state.min_size.array()).any()) {
    next.size = state.initial_size;
    next.phase = TrustRegionPhase::global;
  }
  return next;
}

BoxSpace trego_region(const TrustRegionState& state, const BoxSpace& space) {
  if (state.phase == TrustRegionPhase::global) return space;
  return space.shrink_to_region(state.center, state.size);
}

std::string to_string(RuleKind kind) {
  switch (kind) {
    case RuleKind::ego:
      return "ego";
    case RuleKind::batch_penalized:
      return "batch";
    case RuleKind::trego:
      return "trego";
    case RuleKind::thompson:
      return "thompson";
  }
  return "ego";
}

RuleKind rule_kind_from_string(const std::string& name) {
  if (name == "ego") return RuleKind::ego;
  if (name == "batch" || name == "batch-penalized") return RuleKind::batch_penalized;
  if (name == "trego") return RuleKind::trego;
  if (name == "thompson" || name == "thompson-discrete") return RuleKind::thompson;
  throw ConfigError("unknown rule '" + name + "' (expected ego, batch, trego or thompson)", "rule");
}

std::size_t RuleConfig::candidates_for(std::size_t dimension) const {
  if (candidate_count != 0) return candidate_count;
  return std::min<std::size_t>(1000 * dimension, 10000);
}

void RuleConfig::validate(std::size_t dimension) const {
  if (batch_size < 1) throw ConfigError("batch_size must be at least 1", "batch_size");
  if (kind == RuleKind::trego && batch_size != 1) throw ConfigError("trego queries one point per step", "batch_size");
  if (kind == RuleKind::thompson) {
    if (candidates_for(dimension) < batch_size)
      throw ConfigError("candidate_count must be at least batch_size", "candidate_count");
  } else {
    if (acquisition.name == "thompson") throw ConfigError("acquisition 'thompson' needs the thompson rule", "acquisition");
    const auto& names = acquisition_names();
    if (std::find(names.begin(), names.end(), acquisition.name) == names.end())
      throw ConfigError("unknown acquisition '" + acquisition.name + "'", "acquisition");
    optimizer.validate(dimension);
  }
}

Matrix ego_step(const ModelMap& models, const TaggedDatasets& datasets, const BoxSpace& space,
                const RuleConfig& config, RngSeed seed) {
  config.validate(space.dimension());
  const auto base = build_acquisition(config.acquisition, models, datasets, seed);
  const auto first = optimize_acquisition(space, *base, config.optimizer, seed);
  const std::size_t batch = config.batch_size;
  Matrix out(static_cast<Eigen::Index>(batch), static_cast<Eigen::Index>(space.dimension()));
  out.row(0) = first.point.transpose();
  if (batch == 1) return out;

  const std::string tag =
      models.contains(config.acquisition.objective_tag) ? config.acquisition.objective_tag : required_tags(config.acquisition)[0];
  auto it = models.find(tag);
  if (it == models.end()) throw ConfigError("batch penalization needs a model for tag '" + tag + "'", tag);
  const ProbabilisticModel& model = *it->second;
  const double lipschitz =
      acquisition::estimate_lipschitz(model, space.sample(kLipschitzPoints, SampleMode::quasirandom,
                                                          derive_seed(seed, kLipschitzStream)));
  const double incumbent = best_observation(datasets.at(tag)).value;

  for (std::size_t k = 1; k < batch; ++k) {
    const Matrix pending = out.topRows(static_cast<Eigen::Index>(k));
    auto state = acquisition::make_penalization_state(model, lipschitz, incumbent, pending);
    const PenalizedAcquisition penalized(base, std::move(state));
    const auto pick = optimize_acquisition(space, penalized, config.optimizer, derive_seed(seed, k));
    out.row(static_cast<Eigen::Index>(k)) = pick.point.transpose();
  }
  return out;
}

Matrix thompson_step(const ProbabilisticModel& model, const BoxSpace& space, const RuleConfig& config, RngSeed seed) {
  config.validate(space.dimension());
  const std::size_t n = config.candidates_for(space.dimension());
  const Matrix candidates = space.sample(n, SampleMode::quasirandom, derive_seed(seed, 0));
  const Matrix draws = model.sample(candidates, config.batch_size, derive_seed(seed, 1));
  Matrix out(draws.rows(), candidates.cols());
  for (Eigen::Index s = 0; s < draws.rows(); ++s) {
    Eigen::Index best = 0;
    for (Eigen::Index j = 1; j < draws.cols(); ++j)
      if (draws(s, j) < draws(s, best)) best = j;
    out.row(s) = candidates.row(best);
  }
  return out;
}

TregoStep trego_step(const ModelMap& models, const TaggedDatasets& datasets, const BoxSpace& space,
                     const TrustRegionState& state, const RuleConfig& config, RngSeed seed) {
  return {ego_step(models, datasets, trego_region(state, space), config, seed), state};
}

Matrix recommend(const ModelMap& models, const TaggedDatasets& datasets, const BoxSpace& space,
                 const RuleConfig& config, const std::optional<TrustRegionState>& trust_region, RngSeed seed) {
  switch (config.kind) {
    case RuleKind::ego:
    case RuleKind::batch_penalized:
      return ego_step(models, datasets, space, config, seed);
    case RuleKind::trego:
      if (!trust_region) throw ConfigError("trego needs a trust-region state", "rule_state");
      return trego_step(models, datasets, space, *trust_region, config, seed).points;
    case RuleKind::thompson: {
      const std::string& tag = config.acquisition.objective_tag;
      auto it = models.find(tag);
      if (it == models.end()) throw ConfigError("thompson needs a model for tag '" + tag + "'", tag);
      return thompson_step(*it->second, space, config, seed);
    }
  }
  throw ConfigError("unknown rule", "rule");
}

}  // namespace bolt
