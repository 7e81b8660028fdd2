#include "bolt/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <charconv>
#include <limits>
#include <map>
#include <sstream>

#include "json_io.hpp"
#include "parallel.hpp"

namespace bolt::experiment {
namespace {

using json_io::Json;

std::uint64_t parse_u64(std::string_view text) {
  std::uint64_t v = 0;
  const auto r = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || r.ec != std::errc{} || r.ptr != text.data() + text.size())
    throw ConfigError("'" + std::string(text) + "' is not a seed", "seeds");
  return v;
}

Json config_json(const ExperimentConfig& config) {
  return Json{{"problem", config.problem},
              {"rule", json_io::to_json(config.rule)},
              {"steps", config.steps},
              {"seeds", config.seeds},
              {"initial_design", config.initial_design},
              {"timing", config.timing}};
}

ExperimentConfig config_from_json(const Json& j) {
  ExperimentConfig c;
  c.problem = json_io::string(json_io::member(j, "problem", "config"), "problem");
  c.rule = json_io::rule_from_json(json_io::member(j, "rule", "config"));
  c.steps = json_io::unsigned_integer(json_io::member(j, "steps", "config"), "steps");
  c.seeds.clear();
  const Json& seeds = json_io::member(j, "seeds", "config");
  if (!seeds.is_array()) throw ValidationError("seeds must be an array", "seeds");
  for (const auto& s : seeds) c.seeds.push_back(json_io::unsigned_integer(s, "seeds"));
  c.initial_design = json_io::unsigned_integer(json_io::member(j, "initial_design", "config"), "initial_design");
  c.timing = json_io::member(j, "timing", "config").get<bool>();
  return c;
}

void journal_record(JournalWriter* journal, std::uint64_t seed, double wall_ms, const Record& record) {
  if (!journal) return;
  journal->append(json_io::dump(
      Json{{"type", "record"}, {"seed", seed}, {"wall_ms", wall_ms}, {"record", json_io::parse(serialize(record))}}));
}

void journal_error(JournalWriter* journal, std::uint64_t seed, const std::string& message) {
  if (!journal) return;
  journal->append(json_io::dump(Json{{"type", "error"}, {"seed", seed}, {"message", message}}));
}

std::string describe(const std::exception_ptr& error) {
  try {
    std::rethrow_exception(error);
  } catch (const std::exception& e) {
    return e.what();
  } catch (...) {
    return "unknown error";
  }
}

// Drives one seed until `steps` steps after the initial design are recorded.
void drive(const ExperimentConfig& config, SeedRun& run, AskTellOptimizer& optimizer, JournalWriter* journal) {
  const auto problem = bench::problem(config.problem);
  const Observer observer = bench::make_observer(problem, derive_seed(RngSeed{run.seed}, 0x6E6F697365ULL));
  using Clock = std::chrono::steady_clock;
  try {
    while (run.records.size() < config.steps + 1) {
      const auto start = Clock::now();
      const Matrix x = optimizer.ask();
      optimizer.tell(observer(x));
      const double ms = config.timing ? std::chrono::duration<double, std::milli>(Clock::now() - start).count() : 0.0;
      run.records.push_back(optimizer.record());
      run.step_wall_ms.push_back(ms);
      journal_record(journal, run.seed, ms, optimizer.record());
    }
  } catch (...) {
    run.error = describe(std::current_exception());
    journal_error(journal, run.seed, run.error);
  }
}

std::optional<double> median(std::vector<double> v) {
  if (v.empty()) return std::nullopt;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, sep)) out.push_back(cell);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

}  // namespace

bool ExperimentResult::ok() const {
  return std::all_of(runs.begin(), runs.end(), [](const SeedRun& r) { return r.error.empty(); });
}

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  std::string_view rest(text);
  while (true) {
    const auto comma = rest.find(',');
    const std::string_view item = rest.substr(0, comma);
    const auto dots = item.find("..");
    if (dots == std::string_view::npos) {
      seeds.push_back(parse_u64(item));
    } else {
      const auto lo = parse_u64(item.substr(0, dots));
      const auto hi = parse_u64(item.substr(dots + 2));
      if (hi < lo) throw ConfigError("seed range '" + std::string(item) + "' is empty", "seeds");
      if (hi - lo >= 100000) throw ConfigError("seed range '" + std::string(item) + "' is too large", "seeds");
      for (auto s = lo; s <= hi; ++s) seeds.push_back(s);
    }
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  return seeds;
}

LoopConfig loop_config(const ExperimentConfig& config, std::uint64_t seed) {
  const auto problem = bench::problem(config.problem);
  LoopConfig lc{problem.space, config.rule, problem.tags, config.initial_design, RngSeed{seed}, {}, std::nullopt};
  lc.validate();
  return lc;
}

ExperimentResult run_experiment(const ExperimentConfig& config, JournalWriter* journal) {
  if (config.seeds.empty()) throw ConfigError("at least one seed is required", "seeds");
  std::vector<LoopConfig> loops;
  for (auto seed : config.seeds) loops.push_back(loop_config(config, seed));
  if (journal) journal->append(json_io::dump(Json{{"type", "experiment"}, {"config", config_json(config)}}));
  ExperimentResult result;
  result.runs.resize(config.seeds.size());
  detail::parallel_for(config.seeds.size(), config.num_threads, [&](std::size_t i) {
    SeedRun& run = result.runs[i];
    run.seed = config.seeds[i];
    AskTellOptimizer optimizer(loops[i]);
    drive(config, run, optimizer, journal);
  });
  return result;
}

ExperimentConfig journal_config(const std::filesystem::path& journal) {
  const auto lines = read_journal(journal);
  if (lines.empty()) throw ValidationError("journal '" + journal.string() + "' is empty", "journal");
  const Json header = json_io::parse(lines.front());
  if (!header.is_object() || header.value("type", "") != "experiment")
    throw ValidationError("journal does not start with an experiment header", "journal");
  return config_from_json(json_io::member(header, "config", "journal"));
}

ExperimentResult resume_experiment(const std::filesystem::path& path) {
  const ExperimentConfig config = journal_config(path);
  const auto lines = read_journal(path);
  std::map<std::uint64_t, SeedRun> partial;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const Json event = json_io::parse(lines[i]);
    if (event.value("type", "") != "record") continue;
    const auto seed = json_io::unsigned_integer(json_io::member(event, "seed", "journal"), "seed");
    SeedRun& run = partial[seed];
    run.seed = seed;
    run.records.push_back(deserialize_record(json_io::dump(json_io::member(event, "record", "journal"))));
    run.step_wall_ms.push_back(json_io::number(json_io::member(event, "wall_ms", "journal"), "wall_ms"));
  }

  JournalWriter journal(path);
  ExperimentResult result;
  result.runs.resize(config.seeds.size());
  detail::parallel_for(config.seeds.size(), config.num_threads, [&](std::size_t i) {
    const auto seed = config.seeds[i];
    SeedRun& run = result.runs[i];
    auto it = partial.find(seed);
    if (it != partial.end()) run = it->second;
    run.seed = seed;
    const LoopConfig lc = loop_config(config, seed);
    AskTellOptimizer optimizer = run.records.empty() ? AskTellOptimizer(lc)
                                                     : AskTellOptimizer::from_record(run.records.back(), lc);
    drive(config, run, optimizer, &journal);
  });
  return result;
}

std::string results_csv(const ExperimentConfig& config, const ExperimentResult& result) {
  const auto problem = bench::problem(config.problem);
  const std::size_t dim = problem.space.dimension();
  std::ostringstream out;
  out << "seed,step";
  for (std::size_t d = 0; d < dim; ++d) out << ",x" << d;
  for (const auto& tag : problem.tags) out << ',' << tag;
  out << ",best_so_far,wall_ms\n";

  for (const auto& run : result.runs) {
    if (run.records.empty()) continue;
    const Record& last = run.records.back();
    const std::size_t rows = last.datasets.at(problem.tags.front()).size();
    const std::size_t n0 = run.records.front().datasets.at(problem.tags.front()).size();
    std::size_t step = 0;
    std::size_t step_end = n0;
    for (std::size_t i = 0; i < rows; ++i) {
      while (i >= step_end && step + 1 < run.records.size()) {
        ++step;
        step_end = run.records[step].datasets.at(problem.tags.front()).size();
      }
      const auto idx = static_cast<Eigen::Index>(i);
      out << run.seed << ',' << step;
      const Matrix& x = last.datasets.at(problem.tags.front()).query_points();
      for (std::size_t d = 0; d < dim; ++d) out << ',' << format_double(x(idx, static_cast<Eigen::Index>(d)));
      TaggedDatasets::Map prefix;
      for (const auto& tag : problem.tags) {
        const Dataset& ds = last.datasets.at(tag);
        out << ',' << format_double(ds.observations()(idx, 0));
        prefix.emplace(tag, Dataset(ds.query_points().topRows(idx + 1), ds.observations().topRows(idx + 1)));
      }
      const auto best = bench::best_so_far(problem, TaggedDatasets(std::move(prefix)));
      out << ',' << (best ? format_double(*best) : std::string());
      out << ',' << format_double(run.step_wall_ms[step]) << '\n';
    }
  }
  return out.str();
}

std::string summary_json(const ExperimentConfig& config, const ExperimentResult& result) {
  const auto problem = bench::problem(config.problem);
  Json seeds = Json::array();
  std::vector<double> bests;
  std::vector<double> regrets;
  for (const auto& run : result.runs) {
    Json s{{"seed", run.seed}, {"steps_completed", run.records.empty() ? 0 : run.records.size() - 1}};
    if (!run.records.empty()) {
      const Record& last = run.records.back();
      s["rows"] = last.datasets.at(problem.tags.front()).size();
      const auto best = bench::best_so_far(problem, last.datasets);
      s["best"] = best ? Json(*best) : Json(nullptr);
      if (best) bests.push_back(*best);
      if (best && problem.known_minimum) {
        s["regret"] = *best - *problem.known_minimum;
        regrets.push_back(*best - *problem.known_minimum);
      }
    }
    if (config.timing) {
      double total = 0.0;
      for (double w : run.step_wall_ms) total += w;
      s["wall_ms"] = total;
    }
    if (!run.error.empty()) s["error"] = run.error;
    seeds.push_back(std::move(s));
  }
  Json j = config_json(config);
  j["initial_design"] = loop_config(config, 0).resolved_initial_design();
  j["best_metric"] = problem.name == "vlmop2" ? "hypervolume" : "min_objective";
  j["runs"] = std::move(seeds);
  const auto mb = median(bests);
  const auto mr = median(regrets);
  j["median_best"] = mb ? Json(*mb) : Json(nullptr);
  j["median_regret"] = mr ? Json(*mr) : Json(nullptr);
  j["known_minimum"] = problem.known_minimum ? Json(*problem.known_minimum) : Json(nullptr);
  return j.dump(2) + "\n";
}

std::vector<RegretRow> regret_from_csv(const std::string& csv, double f_min) {
  std::istringstream in(csv);
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("results CSV is empty", "csv");
  const auto header = split(line, ',');
  auto column = [&](const std::string& name) {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw ValidationError("results CSV has no '" + name + "' column", name);
    return static_cast<std::size_t>(it - header.begin());
  };
  const auto seed_col = column("seed");
  const auto step_col = column("step");
  const auto best_col = column("best_so_far");
  std::vector<RegretRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cells = split(line, ',');
    if (cells.size() != header.size())
      throw ValidationError("results CSV line " + std::to_string(line_no) + " has the wrong number of cells", "csv");
    if (cells[best_col].empty()) continue;
    const auto seed = parse_u64(cells[seed_col]);
    const auto step = static_cast<std::size_t>(parse_u64(cells[step_col]));
    double best = 0.0;
    const auto& b = cells[best_col];
    const auto r = std::from_chars(b.data(), b.data() + b.size(), best);
    if (r.ec != std::errc{}) throw ValidationError("bad best_so_far on line " + std::to_string(line_no), "best_so_far");
    if (!rows.empty() && rows.back().seed == seed && rows.back().step == step)
      rows.back().regret = best - f_min;
    else
      rows.push_back({seed, step, best - f_min});
  }
  return rows;
}

}  // namespace bolt::experiment
