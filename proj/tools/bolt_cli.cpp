#include <CLI11.hpp>

#include <cstdlib>
#include <csignal>
#include <fstream>
#include <iostream>

#include "bolt/experiment.hpp"
#include "bolt/service.hpp"

namespace {

constexpr int kUsage = 2;
constexpr int kRuntime = 3;

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw bolt::Error("io_error", "cannot write '" + path + "'");
  out << content;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw bolt::ConfigError("cannot read '" + path + "'", "in");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// --rule takes a rule kind or an acquisition name (EGO with that acquisition).
bolt::RuleConfig rule_from_flags(const std::string& rule, const std::string& acq, std::size_t batch,
                                 const bolt::bench::Problem& problem) {
  bolt::RuleConfig config;
  config.acquisition.name = problem.default_acquisition;
  const auto& names = bolt::acquisition_names();
  if (std::find(names.begin(), names.end(), rule) != names.end() && rule != "thompson") {
    config.kind = bolt::RuleKind::ego;
    config.acquisition.name = rule;
  } else {
    config.kind = bolt::rule_kind_from_string(rule);
  }
  if (!acq.empty()) config.acquisition.name = acq;
  config.batch_size = batch;
  if (config.kind == bolt::RuleKind::ego && batch > 1) config.kind = bolt::RuleKind::batch_penalized;
  return config;
}

int finish(const bolt::experiment::ExperimentConfig& config, const bolt::experiment::ExperimentResult& result,
           const std::string& out, const std::string& journal) {
  write_file(out + ".csv", bolt::experiment::results_csv(config, result));
  write_file(out + ".json", bolt::experiment::summary_json(config, result));
  if (result.ok()) return 0;
  for (const auto& run : result.runs)
    if (!run.error.empty()) std::cerr << "seed " << run.seed << ": " << run.error << "\n";
  if (!journal.empty()) std::cerr << "journal retained at " << journal << "; continue with `bolt resume`\n";
  return kRuntime;
}

bolt::service::HttpServer* g_server = nullptr;

void on_signal(int) {
  if (g_server) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian optimization benchmarks and session service"};
  app.require_subcommand(1);

  std::string problem = "branin";
  std::string rule = "ego";
  std::string acq;
  std::size_t batch = 1;
  std::size_t steps = 20;
  std::uint64_t seed = 0;
  std::string seeds;
  std::size_t n0 = 0;
  std::string out = "results";
  std::string journal;
  bool timing = false;
  std::size_t threads = 1;

  auto* run = app.add_subcommand("run", "Run a seeded benchmark experiment");
  run->add_option("--problem", problem, "branin, hartmann6, vlmop2 or constrained_branin");
  run->add_option("--rule", rule, "ego, batch, trego, thompson, or an acquisition name");
  run->add_option("--acq", acq, "ei, aei, nlcb, cei, ef, var or ehvi");
  run->add_option("--batch-size", batch, "Points per step")->check(CLI::PositiveNumber);
  run->add_option("--steps", steps, "Optimization steps after the initial design");
  auto* seed_opt = run->add_option("--seed", seed, "Single seed");
  run->add_option("--seeds", seeds, "Seed list such as 0..9 or 1,4,7")->excludes(seed_opt);
  run->add_option("--n0", n0, "Initial design size (default 2D+2)");
  run->add_option("--out", out, "Output prefix for <out>.csv and <out>.json");
  run->add_option("--journal", journal, "Journal file for resuming");
  run->add_flag("--timing", timing, "Record wall-clock milliseconds per step");
  run->add_option("--threads", threads, "Seeds run concurrently");

  std::string regret_in;
  std::string regret_problem;
  std::optional<double> fmin;
  auto* regret = app.add_subcommand("regret", "Simple regret per seed and step from a results CSV");
  regret->add_option("--in", regret_in, "Results CSV")->required();
  regret->add_option("--problem", regret_problem, "Problem providing the known minimum");
  regret->add_option("--fmin", fmin, "Known minimum");
  regret->add_option("--out", out, "Output CSV (default stdout)");

  std::string host = "127.0.0.1";
  int port = 8080;
  std::string data_dir;
  auto* serve = app.add_subcommand("serve", "Serve the ask-tell session API over HTTP");
  serve->add_option("--port", port, "Port (0 picks a free one)");
  serve->add_option("--host", host, "Bind address");
  serve->add_option("--journal,--data-dir", data_dir, "Session journal directory (default $BOLT_DATA_DIR or ./sessions)");

  std::string resume_journal;
  std::string resume_out = "results";
  auto* resume = app.add_subcommand("resume", "Continue an interrupted run from its journal");
  resume->add_option("--journal", resume_journal, "Journal written by run --journal")->required();
  resume->add_option("--out", resume_out, "Output prefix");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsage;
  }

  try {
    if (*run) {
      const auto p = bolt::bench::problem(problem);
      bolt::experiment::ExperimentConfig config;
      config.problem = problem;
      config.rule = rule_from_flags(rule, acq, batch, p);
      config.steps = steps;
      config.seeds = seeds.empty() ? std::vector<std::uint64_t>{seed} : bolt::experiment::parse_seeds(seeds);
      config.initial_design = n0;
      config.timing = timing;
      config.num_threads = threads;
      for (auto s : config.seeds) bolt::experiment::loop_config(config, s);
      std::unique_ptr<bolt::JournalWriter> writer;
      if (!journal.empty()) writer = std::make_unique<bolt::JournalWriter>(journal, true);
      const auto result = bolt::experiment::run_experiment(config, writer.get());
      return finish(config, result, out, journal);
    }
    if (*regret) {
      if (!fmin && regret_problem.empty()) throw bolt::ConfigError("regret needs --problem or --fmin", "fmin");
      if (!fmin) {
        const auto p = bolt::bench::problem(regret_problem);
        if (!p.known_minimum) throw bolt::ConfigError("problem '" + regret_problem + "' has no known minimum", "problem");
        fmin = p.known_minimum;
      }
      std::string text = "seed,step,regret\n";
      for (const auto& r : bolt::experiment::regret_from_csv(read_file(regret_in), *fmin))
        text += std::to_string(r.seed) + "," + std::to_string(r.step) + "," + bolt::format_double(r.regret) + "\n";
      if (out == "results") {
        std::cout << text;
      } else {
        write_file(out, text);
      }
      return 0;
    }
    if (*serve) {
      if (data_dir.empty()) {
        const char* env = std::getenv("BOLT_DATA_DIR");
        data_dir = env ? env : "sessions";
      }
      bolt::service::SessionStore store(data_dir);
      bolt::service::HttpServer server(store);
      const int bound = server.bind(host, port);
      g_server = &server;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::cout << "listening on http://" << host << ":" << bound << " (sessions in " << data_dir << ")" << std::endl;
      server.listen();
      return 0;
    }
    if (*resume) {
      const auto config = bolt::experiment::journal_config(resume_journal);
      const auto result = bolt::experiment::resume_experiment(resume_journal);
      return finish(config, result, resume_out, resume_journal);
    }
  } catch (const bolt::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return kUsage;
  } catch (const bolt::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntime;
  }
  return 0;
}
