// Command-line front end: run a scenario, benchmark an environment, or
// generate a scenario file.
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lscdr/lscdr.hpp"

namespace {

constexpr int kExitViolation = 2;
constexpr int kExitConfig = 3;

int cmd_run(const std::string& scenario_path, const std::string& range, std::uint64_t seed,
            bool seed_set, const std::string& log_path, int threads) {
  lscdr::Scenario sc = lscdr::load_scenario(scenario_path);
  if (seed_set) sc.seed = seed;
  const double r_c = range.empty() ? sc.comm_range : lscdr::parse_range(range);
  lscdr::SimConfig cfg = lscdr::SimConfig::for_scenario(sc, r_c);
  cfg.threads = threads;
  cfg.record_log = !log_path.empty();
  const lscdr::RunResult res = lscdr::run(sc, cfg);
  if (!log_path.empty()) {
    std::ofstream out(log_path);
    if (!out) throw lscdr::ConfigError("cannot write log " + log_path);
    for (const auto& line : res.log) out << line << '\n';
  }
  const auto& m = res.metrics;
  std::cout << "success=" << (m.success ? 1 : 0) << " flight_time_s=" << m.flight_time
            << " flight_dist_m=" << m.flight_distance << " compute_ms=" << m.compute_ms
            << " steps=" << m.steps << '\n';
  for (const auto& v : m.violations)
    std::cerr << "violation step=" << v.step << " kind=" << v.kind << " " << v.detail << '\n';
  return m.violations.empty() ? 0 : kExitViolation;
}

int cmd_bench(const std::string& env, int trials, const std::vector<std::string>& ranges,
              const std::string& out_path, std::uint64_t seed, int threads) {
  const lscdr::Environment e = lscdr::parse_environment(env);
  std::vector<double> rcs;
  for (const auto& r : ranges) rcs.push_back(lscdr::parse_range(r));
  std::ofstream file;
  if (!out_path.empty()) {
    file.open(out_path);
    if (!file) throw lscdr::ConfigError("cannot write " + out_path);
  }
  std::ostream& os = out_path.empty() ? std::cout : file;
  lscdr::write_csv_header(os);
  bool clean = true;
  for (double r_c : rcs) {
    const auto row = lscdr::benchmark_cell(e, r_c, trials, seed, threads,
                                           [&](int t, const lscdr::RunMetrics& m) {
                                             for (const auto& v : m.violations)
                                               std::cerr << env << " trial " << t << ": "
                                                         << v.kind << " at step " << v.step
                                                         << " (" << v.detail << ")\n";
                                           });
    lscdr::write_csv_row(os, row);
    os.flush();
    for (const auto& m : row.runs) clean = clean && m.violations.empty();
  }
  return clean ? 0 : kExitViolation;
}

int cmd_gen(const std::string& env, std::uint64_t seed, const std::string& out_path) {
  const lscdr::Scenario sc = lscdr::generate(lscdr::parse_environment(env), seed);
  if (out_path.empty()) std::cout << lscdr::scenario_to_json(sc).dump(2) << '\n';
  else lscdr::save_scenario(sc, out_path);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Decentralized multi-agent trajectory planner and swarm simulator"};
  app.require_subcommand(1);
  int threads = 1;
  app.add_option("--threads", threads, "Worker threads for per-agent planning")
      ->check(CLI::PositiveNumber);

  std::string scenario, range, log;
  std::uint64_t seed = 1;
  auto* run = app.add_subcommand("run", "Simulate one scenario file");
  run->add_option("--scenario", scenario, "Scenario JSON file")->required();
  run->add_option("--comm-range", range, "Communication range in meters or 'inf'");
  auto* run_seed = run->add_option("--seed", seed, "Override the scenario seed");
  run->add_option("--log", log, "Write one JSON record per step");

  std::string env = "forest", out;
  int trials = 30;
  std::vector<std::string> ranges{"2", "3", "4", "inf"};
  auto* bench = app.add_subcommand("bench", "Benchmark generated scenarios");
  bench->add_option("--env", env, "forest|sparse|dense")->required();
  bench->add_option("--trials", trials, "Trials per range")->check(CLI::NonNegativeNumber);
  bench->add_option("--comm-range", ranges, "Communication ranges")->delimiter(',');
  bench->add_option("--out", out, "CSV output (stdout when omitted)");
  bench->add_option("--seed", seed, "Seed of the first trial");

  auto* gen = app.add_subcommand("gen", "Generate a scenario file");
  gen->add_option("--env", env, "forest|sparse|dense")->required();
  gen->add_option("--seed", seed, "Generator seed");
  gen->add_option("--out", out, "Output file (stdout when omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*run) return cmd_run(scenario, range, seed, run_seed->count() > 0, log, threads);
    if (*bench) return cmd_bench(env, trials, ranges, out, seed, threads);
    if (*gen) return cmd_gen(env, seed, out);
  } catch (const lscdr::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const lscdr::GenerationError& e) {
    std::cerr << "generation error: " << e.what() << '\n';
    return kExitConfig;
  }
  return 0;
}
