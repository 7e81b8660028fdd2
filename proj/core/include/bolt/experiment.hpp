#pragma once

#include <cstdint>
#include <exception>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "bolt/bench.hpp"
#include "bolt/journal.hpp"

namespace bolt::experiment {

struct ExperimentConfig {
  std::string problem = "branin";
  RuleConfig rule;
  std::size_t steps = 20;
  std::vector<std::uint64_t> seeds{0};
  std::size_t initial_design = 0;
  bool timing = false;
  std::size_t num_threads = 1;  // seeds run concurrently
};

// "7", "0..9" (inclusive) or a comma-separated mix of both.
std::vector<std::uint64_t> parse_seeds(const std::string& text);

LoopConfig loop_config(const ExperimentConfig& config, std::uint64_t seed);

struct SeedRun {
  std::uint64_t seed = 0;
  std::vector<Record> records;       // one per completed tell
  std::vector<double> step_wall_ms;  // same length as records
  std::string error;                 // empty on success
};

struct ExperimentResult {
  std::vector<SeedRun> runs;  // in seed order
  bool ok() const;
};

// Runs every seed. With a journal, every record is appended as it is produced.
ExperimentResult run_experiment(const ExperimentConfig& config, JournalWriter* journal = nullptr);

// Continues the runs recorded in a journal written by run_experiment.
ExperimentConfig journal_config(const std::filesystem::path& journal);
ExperimentResult resume_experiment(const std::filesystem::path& journal);

// seed, step, x..., one column per tag, best_so_far, wall_ms.
std::string results_csv(const ExperimentConfig& config, const ExperimentResult& result);
std::string summary_json(const ExperimentConfig& config, const ExperimentResult& result);

struct RegretRow {
  std::uint64_t seed;
  std::size_t step;
  double regret;
};

// Best-so-far at the end of each step minus f_min, read back from results_csv output.
std::vector<RegretRow> regret_from_csv(const std::string& csv, double f_min);

}  // namespace bolt::experiment
