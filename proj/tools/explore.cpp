// explore: run exploration missions and write benchmark outputs.

#include "eaae/bench.hpp"
#include "eaae/config_io.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

namespace {

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = s.find(',', start);
    out.push_back(s.substr(start, comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Energy-aware frontier exploration benchmark"};
  std::string scenarios = "simple";
  std::string policies = "eaae";
  int runs = 1;
  std::uint64_t seed = 0;
  std::string out_dir;
  std::string config_file;
  std::string dump_scenario_name;
  bool dump_config = false;
  int jobs = 0;
  app.add_option("--scenario", scenarios, "Built-in name (simple, pillars) or JSON file; comma-separated list allowed");
  app.add_option("--policy", policies, "eaae, nearest or classic; comma-separated list allowed");
  app.add_option("--runs", runs, "Runs per (scenario, policy)")->check(CLI::PositiveNumber);
  app.add_option("--seed", seed, "Base seed; run i uses seed + i");
  app.add_option("--out", out_dir, "Output directory");
  app.add_option("--config", config_file, "JSON overlay for mission parameters")->check(CLI::ExistingFile);
  app.add_option("--dump-scenario", dump_scenario_name, "Print a built-in scenario as JSON and exit");
  app.add_flag("--dump-config", dump_config, "Print the effective parameters as JSON and exit");
  app.add_option("--jobs", jobs, "Concurrent missions (0: hardware concurrency)")->check(CLI::NonNegativeNumber);
  CLI11_PARSE(app, argc, argv);

  try {
    if (!dump_scenario_name.empty()) {
      std::cout << eaae::dump_scenario(eaae::builtin_scenario(dump_scenario_name));
      return 0;
    }
    eaae::BenchmarkRequest request;
    if (!config_file.empty()) eaae::apply_config_file(request.base, config_file);
    if (dump_config) {
      std::cout << eaae::config_to_json(request.base);
      return 0;
    }
    if (out_dir.empty()) throw std::invalid_argument("--out is required");
    for (const auto& s : split_list(scenarios)) request.scenarios.push_back(eaae::resolve_scenario(s));
    for (const auto& p : split_list(policies)) request.policies.push_back(eaae::parse_policy(p));
    request.runs = runs;
    request.base_seed = seed;
    request.jobs = jobs;

    // Finished missions are flushed immediately so an interrupted benchmark
    // leaves usable partial results.
    const std::filesystem::path out(out_dir);
    eaae::write_text_file(out / "summary.csv", std::string(eaae::kSummaryHeader) + "\n");
    auto on_run = [&](const eaae::RunResult& r) {
      eaae::write_text_file(out / ("series_" + std::to_string(r.run) + ".csv"), eaae::series_csv(r.log.series));
      std::ofstream summary(out / "summary.csv", std::ios::app);
      summary << eaae::summary_row(r) << '\n';
      const auto& s = r.log.summary;
      std::cerr << "run " << r.run << ' ' << r.log.scenario << ' ' << eaae::to_string(r.log.policy) << " seed "
                << r.log.seed << ": " << s.total_energy << " J, " << s.completion_time << " s, explored "
                << s.explored_fraction << ", " << eaae::to_string(s.termination) << '\n';
    };
    const auto report = eaae::run_benchmark(request, on_run);
    eaae::emit_outputs(report, out);
    for (const auto& g : report.groups)
      std::cout << g.scenario << ' ' << eaae::to_string(g.policy) << ": median energy " << g.total_energy.median
                << " J, median completion " << g.completion_time.median << " s\n";
  } catch (const std::exception& e) {
    std::cerr << "explore: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
