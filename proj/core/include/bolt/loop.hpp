#pragma once

#include <exception>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bolt/error.hpp"
#include "bolt/rules.hpp"

namespace bolt {

inline constexpr int kRecordSchemaVersion = 1;

using HyperparameterMap = std::map<std::string, GPHyperparameters, std::less<>>;

// Complete snapshot of an ask-tell optimizer.
struct Record {
  int schema_version = kRecordSchemaVersion;
  std::size_t step_index = 0;  // number of tells applied
  RngSeed seed;
  std::uint64_t rng_counter = 0;  // streams consumed from `seed`
  TaggedDatasets datasets;
  HyperparameterMap models;
  std::optional<TrustRegionState> trust_region;
  std::optional<Matrix> pending_ask;

  friend bool operator==(const Record& a, const Record& b);
};

std::string serialize(const Record& record);
Record deserialize_record(std::string_view payload);

struct LoopConfig {
  BoxSpace space;
  RuleConfig rule;
  std::vector<std::string> tags;  // empty: the tags the acquisition needs
  std::size_t initial_design = 0;  // 0: 2 * D + 2
  RngSeed seed;
  FitConfig fit;
  std::optional<double> target;  // run() stops once the best objective reaches it

  std::vector<std::string> resolved_tags() const;
  std::size_t resolved_initial_design() const { return initial_design ? initial_design : 2 * space.dimension() + 2; }
  void validate() const;
};

// Thrown by tell when refitting fails; the optimizer keeps `previous`.
class FitFailure : public Error {
 public:
  FitFailure(const std::string& message, Record previous)
      : Error("fit_failure", message), previous_(std::move(previous)) {}
  const Record& previous() const noexcept { return previous_; }

 private:
  Record previous_;
};

// Ask-tell state machine. The first ask returns the quasi-random initial design.
class AskTellOptimizer {
 public:
  explicit AskTellOptimizer(LoopConfig config);

  static AskTellOptimizer restore(std::string_view payload, LoopConfig config);
  static AskTellOptimizer from_record(Record record, LoopConfig config);

  // Pending points; computed on first call after a tell.
  const Matrix& ask();
  // Points must match the pending ask row count when one exists.
  void tell(const TaggedDatasets& observations);

  std::string save() const { return serialize(record_); }

  const Record& record() const noexcept { return record_; }
  const LoopConfig& config() const noexcept { return config_; }
  const ModelMap& models() const noexcept { return models_; }
  std::vector<std::string> tags() const { return tags_; }

  // Best objective observation so far, respecting constraints for cei.
  std::optional<double> best_value() const;

 private:
  AskTellOptimizer(LoopConfig config, Record record);
  void rebuild_models();
  void check_observations(const TaggedDatasets& observations) const;

  LoopConfig config_;
  std::vector<std::string> tags_;
  Record record_;
  ModelMap models_;
};

// Evaluates the query points for every tag.
using Observer = std::function<TaggedDatasets(const Matrix& query_points)>;

struct RunResult {
  std::vector<Record> records;
  std::exception_ptr error;
};

// Initial design plus `steps` ask/observe/tell rounds; records after each tell.
RunResult run(const LoopConfig& config, const Observer& observer, std::size_t steps);
RunResult run(AskTellOptimizer& optimizer, const Observer& observer, std::size_t steps);

}  // namespace bolt
