#include "bolt/loop.hpp"

#include <algorithm>
#include <set>

#include "json_io.hpp"

namespace bolt {
namespace {

using json_io::Json;

bool same_matrix(const std::optional<Matrix>& a, const std::optional<Matrix>& b) {
  if (a.has_value() != b.has_value()) return false;
  if (!a) return true;
  return a->rows() == b->rows() && a->cols() == b->cols() && *a == *b;
}

}  // namespace

bool operator==(const Record& a, const Record& b) {
  return a.schema_version == b.schema_version && a.step_index == b.step_index && a.seed == b.seed &&
         a.rng_counter == b.rng_counter && a.datasets == b.datasets && a.models == b.models &&
         a.trust_region == b.trust_region && same_matrix(a.pending_ask, b.pending_ask);
}

std::string serialize(const Record& record) {
  Json models = Json::object();
  for (const auto& [tag, hp] : record.models) models[tag] = json_io::to_json(hp);
  Json j{{"schema_version", record.schema_version},
         {"step_index", record.step_index},
         {"rng", {{"seed", record.seed.value}, {"counter", record.rng_counter}}},
         {"datasets", json_io::to_json(record.datasets)},
         {"models", std::move(models)}};
  j["rule_state"] = Json{{"trust_region", record.trust_region ? json_io::to_json(*record.trust_region) : Json(nullptr)}};
  j["pending_ask"] = record.pending_ask ? json_io::to_json(*record.pending_ask) : Json(nullptr);
  return json_io::dump(j);
}

Record deserialize_record(std::string_view payload) {
  const Json j = json_io::parse(payload);
  if (!j.is_object()) throw ValidationError("record must be a JSON object", "record");
  const Json& version = json_io::member(j, "schema_version", "record");
  if (!version.is_number_integer()) throw ValidationError("schema_version must be an integer", "schema_version");
  if (version.get<std::int64_t>() != kRecordSchemaVersion)
    throw VersionError(kRecordSchemaVersion, static_cast<int>(version.get<std::int64_t>()));

  Record r;
  r.step_index = json_io::unsigned_integer(json_io::member(j, "step_index", "record"), "step_index");
  const Json& rng = json_io::member(j, "rng", "record");
  r.seed = RngSeed{json_io::unsigned_integer(json_io::member(rng, "seed", "rng"), "rng.seed")};
  r.rng_counter = json_io::unsigned_integer(json_io::member(rng, "counter", "rng"), "rng.counter");
  r.datasets = json_io::tagged_from_json(json_io::member(j, "datasets", "record"), "datasets");
  const Json& models = json_io::member(j, "models", "record");
  if (!models.is_object()) throw ValidationError("models must be an object keyed by tag", "models");
  for (const auto& [tag, hp] : models.items()) r.models.emplace(tag, json_io::hyperparameters_from_json(hp, "models." + tag));
  const Json& rule_state = json_io::member(j, "rule_state", "record");
  if (rule_state.contains("trust_region") && !rule_state["trust_region"].is_null())
    r.trust_region = json_io::trust_region_from_json(rule_state["trust_region"], "rule_state.trust_region");
  const Json& pending = json_io::member(j, "pending_ask", "record");
  if (!pending.is_null()) r.pending_ask = json_io::matrix_from_json(pending, "pending_ask", r.datasets.input_dim());
  return r;
}

std::vector<std::string> LoopConfig::resolved_tags() const {
  std::vector<std::string> out = tags.empty() ? required_tags(rule.acquisition) : tags;
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

void LoopConfig::validate() const {
  rule.validate(space.dimension());
  const auto all = resolved_tags();
  for (const auto& tag : all)
    if (tag.empty()) throw ConfigError("tags must be non-empty strings", "tags");
  for (const auto& tag : required_tags(rule.acquisition)) {
    if (std::find(all.begin(), all.end(), tag) == all.end())
      throw ConfigError("acquisition '" + rule.acquisition.name + "' needs tag '" + tag + "'", "tags");
  }
  if (!std::binary_search(all.begin(), all.end(), rule.acquisition.objective_tag) &&
      (rule.kind == RuleKind::trego || rule.kind == RuleKind::thompson || rule.batch_size > 1)) {
    throw ConfigError("rule needs the objective tag '" + rule.acquisition.objective_tag + "'", "tags");
  }
  if (rule.kind == RuleKind::thompson && all.size() != 1)
    throw ConfigError("thompson sampling handles a single objective tag", "tags");
}

AskTellOptimizer::AskTellOptimizer(LoopConfig config) : config_(std::move(config)) {
  config_.validate();
  tags_ = config_.resolved_tags();
  record_.seed = config_.seed;
  TaggedDatasets::Map empty;
  for (const auto& tag : tags_) empty.emplace(tag, Dataset(config_.space.dimension(), 1));
  record_.datasets = TaggedDatasets(std::move(empty));
}

AskTellOptimizer::AskTellOptimizer(LoopConfig config, Record record)
    : config_(std::move(config)), record_(std::move(record)) {
  config_.validate();
  tags_ = config_.resolved_tags();
  const auto found = record_.datasets.tags();
  for (const auto& tag : tags_)
    if (!record_.datasets.contains(tag)) throw ValidationError("record has no dataset for tag '" + tag + "'", tag);
  for (const auto& tag : found)
    if (!std::binary_search(tags_.begin(), tags_.end(), tag))
      throw ValidationError("record has unexpected tag '" + tag + "'", tag);
  if (record_.datasets.input_dim() != config_.space.dimension())
    throw DimensionError("record datasets have dimension " + std::to_string(record_.datasets.input_dim()) +
                             ", space has " + std::to_string(config_.space.dimension()),
                         "datasets");
  for (const auto& [tag, ds] : record_.datasets)
    if (ds.output_dim() != 1) throw ValidationError("dataset '" + tag + "' must have one output column", tag);
  for (const auto& [tag, hp] : record_.models) {
    if (!std::binary_search(tags_.begin(), tags_.end(), tag))
      throw ValidationError("record has a model for unexpected tag '" + tag + "'", "models." + tag);
    if (hp.kernel.input_dim() != config_.space.dimension())
      throw DimensionError("model '" + tag + "' has the wrong dimension", "models." + tag);
  }
  if (record_.step_index > 0) {
    for (const auto& tag : tags_)
      if (!record_.models.contains(tag)) throw ValidationError("record has no model for tag '" + tag + "'", "models");
    if (config_.rule.kind == RuleKind::trego && !record_.trust_region)
      throw ValidationError("trego record has no trust-region state", "rule_state");
  }
  if (record_.pending_ask) {
    const Matrix& p = *record_.pending_ask;
    if (static_cast<std::size_t>(p.cols()) != config_.space.dimension())
      throw DimensionError("pending_ask has the wrong dimension", "pending_ask");
    for (Eigen::Index i = 0; i < p.rows(); ++i)
      if (!config_.space.contains(p.row(i).transpose()))
        throw ValidationError("pending_ask row " + std::to_string(i) + " lies outside the space",
                              "pending_ask[" + std::to_string(i) + "]");
  }
  rebuild_models();
}

AskTellOptimizer AskTellOptimizer::restore(std::string_view payload, LoopConfig config) {
  return AskTellOptimizer(std::move(config), deserialize_record(payload));
}

AskTellOptimizer AskTellOptimizer::from_record(Record record, LoopConfig config) {
  return AskTellOptimizer(std::move(config), std::move(record));
}

void AskTellOptimizer::rebuild_models() {
  ModelMap models;
  FitConfig fit = config_.fit;
  fit.input_range = config_.space.width();
  for (const auto& [tag, hp] : record_.models)
    models.emplace(tag, std::make_shared<const GPModel>(hp, record_.datasets.at(tag), fit));
  models_ = std::move(models);
}

const Matrix& AskTellOptimizer::ask() {
  if (record_.pending_ask) return *record_.pending_ask;
  const RngSeed stream = derive_seed(record_.seed, record_.rng_counter);
  Matrix points;
  if (record_.step_index == 0 && record_.datasets.at(tags_.front()).empty()) {
    points = config_.space.sample(config_.resolved_initial_design(), SampleMode::quasirandom, stream);
  } else {
    points = recommend(models_, record_.datasets, config_.space, config_.rule, record_.trust_region, stream);
  }
  record_.pending_ask = std::move(points);
  ++record_.rng_counter;
  return *record_.pending_ask;
}

void AskTellOptimizer::check_observations(const TaggedDatasets& observations) const {
  for (const auto& tag : tags_)
    if (!observations.contains(tag)) throw ValidationError("observations are missing tag '" + tag + "'", tag);
  for (const auto& [tag, ds] : observations)
    if (!std::binary_search(tags_.begin(), tags_.end(), tag))
      throw ValidationError("unexpected tag '" + tag + "'", tag);
  const std::size_t rows = observations.at(tags_.front()).size();
  for (const auto& [tag, ds] : observations) {
    if (ds.input_dim() != config_.space.dimension())
      throw DimensionError(tag + ": query points have " + std::to_string(ds.input_dim()) + " columns, expected " +
                               std::to_string(config_.space.dimension()),
                           tag);
    if (ds.output_dim() != 1) throw ValidationError(tag + ": expected one observation column", tag);
    if (ds.size() != rows) throw ValidationError(tag + ": row count differs between tags", tag);
    if (ds.query_points() != observations.at(tags_.front()).query_points())
      throw ValidationError(tag + ": query points differ between tags", tag);
  }
  if (rows == 0) throw ValidationError("tell needs at least one row", "observations");
  if (record_.pending_ask && static_cast<std::size_t>(record_.pending_ask->rows()) != rows)
    throw ValidationError("tell has " + std::to_string(rows) + " rows but " +
                              std::to_string(record_.pending_ask->rows()) + " points were asked",
                          "observations");
  const Matrix& x = observations.at(tags_.front()).query_points();
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    if (!config_.space.contains(x.row(i).transpose()))
      throw ValidationError("query point " + std::to_string(i) + " lies outside the space",
                            "query_points[" + std::to_string(i) + "]");
}

void AskTellOptimizer::tell(const TaggedDatasets& observations) {
  check_observations(observations);
  Record next = record_;
  next.datasets = record_.datasets.append(observations);

  FitConfig fit = config_.fit;
  fit.input_range = config_.space.width();
  const RngSeed stream = derive_seed(record_.seed, record_.rng_counter);
  ModelMap models;
  try {
    for (std::size_t t = 0; t < tags_.size(); ++t) {
      const std::string& tag = tags_[t];
      FitConfig tag_fit = fit;
      if (auto it = record_.models.find(tag); it != record_.models.end()) tag_fit.initial = it->second;
      auto model = std::make_shared<const GPModel>(fit_gp(next.datasets.at(tag), tag_fit, derive_seed(stream, t)));
      next.models[tag] = model->hyperparameters();
      models.emplace(tag, std::move(model));
    }
  } catch (const Error& e) {
    throw FitFailure(std::string("model refit failed: ") + e.what(), record_);
  }

  if (config_.rule.kind == RuleKind::trego) {
    const std::string& tag = config_.rule.acquisition.objective_tag;
    if (!next.trust_region) {
      const auto best = best_observation(next.datasets.at(tag));
      next.trust_region = trego_initial_state(config_.space, best.point, best.value);
    } else {
      const auto best = best_observation(observations.at(tag));
      next.trust_region = trego_update(*next.trust_region, config_.space, best.value, best.point);
    }
  }

  next.pending_ask.reset();
  ++next.step_index;
  ++next.rng_counter;
  record_ = std::move(next);
  models_ = std::move(models);
}

std::optional<double> AskTellOptimizer::best_value() const {
  const auto& spec = config_.rule.acquisition;
  if (spec.name == "ehvi") return std::nullopt;
  if (spec.name == "cei") return feasible_incumbent(record_.datasets, spec);
  if (!record_.datasets.contains(spec.objective_tag)) return std::nullopt;
  const Dataset& ds = record_.datasets.at(spec.objective_tag);
  if (ds.empty()) return std::nullopt;
  return best_observation(ds).value;
}

RunResult run(AskTellOptimizer& optimizer, const Observer& observer, std::size_t steps) {
  RunResult result;
  const auto target = optimizer.config().target;
  auto reached = [&] {
    if (!target) return false;
    const auto best = optimizer.best_value();
    return best && *best <= *target;
  };
  try {
    if (optimizer.record().step_index == 0) {
      optimizer.tell(observer(optimizer.ask()));
      result.records.push_back(optimizer.record());
    }
    for (std::size_t k = 0; k < steps && !reached(); ++k) {
      optimizer.tell(observer(optimizer.ask()));
      result.records.push_back(optimizer.record());
    }
  } catch (...) {
    result.error = std::current_exception();
  }
  return result;
}

RunResult run(const LoopConfig& config, const Observer& observer, std::size_t steps) {
  AskTellOptimizer optimizer(config);
  return run(optimizer, observer, steps);
}

}  // namespace bolt
