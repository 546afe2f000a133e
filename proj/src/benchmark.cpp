#include "eaae/bench.hpp"

#include <algorithm>
#include <atomic>
#include <mutex>
#include <numeric>
#include <thread>

namespace eaae {

MetricStats compute_stats(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("statistics of an empty sample");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  MetricStats s;
  s.median = n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / double(n);
  s.min = values.front();
  s.max = values.back();
  return s;
}

GroupReport aggregate_group(const std::vector<const RunResult*>& runs) {
  if (runs.empty()) throw std::invalid_argument("aggregate_group needs at least one run");
  GroupReport g;
  g.scenario = runs.front()->log.scenario;
  g.policy = runs.front()->log.policy;
  auto metric = [&](auto field) {
    std::vector<double> v;
    for (const auto* r : runs) v.push_back(field(r->log.summary));
    return compute_stats(std::move(v));
  };
  g.completion_time = metric([](const MissionSummary& s) { return s.completion_time; });
  g.total_energy = metric([](const MissionSummary& s) { return s.total_energy; });
  g.mean_power = metric([](const MissionSummary& s) { return s.mean_power; });
  g.final_entropy = metric([](const MissionSummary& s) { return s.final_entropy; });
  g.explored_fraction = metric([](const MissionSummary& s) { return s.explored_fraction; });
  std::size_t cycles = 0;
  for (const auto* r : runs) {
    g.runs.push_back(r->run);
    for (const auto& c : r->log.cycles) {
      g.mean_timings.clustering_ms += c.timings.clustering_ms;
      g.mean_timings.trajectory_ms += c.timings.trajectory_ms;
      g.mean_timings.energy_ms += c.timings.energy_ms;
      ++cycles;
    }
  }
  if (cycles > 0) {
    g.mean_timings.clustering_ms /= double(cycles);
    g.mean_timings.trajectory_ms /= double(cycles);
    g.mean_timings.energy_ms /= double(cycles);
  }
  return g;
}

BenchmarkReport run_benchmark(const BenchmarkRequest& request, const std::function<void(const RunResult&)>& on_run) {
  if (request.runs < 1) throw std::invalid_argument("runs must be >= 1");
  if (request.scenarios.empty() || request.policies.empty())
    throw std::invalid_argument("need at least one scenario and one policy");

  std::vector<MissionConfig> configs;
  BenchmarkReport report;
  for (const auto& scenario : request.scenarios)
    for (PolicyKind policy : request.policies)
      for (int r = 0; r < request.runs; ++r) {
        MissionConfig c = request.base;
        c.scenario = scenario;
        c.policy = policy;
        c.seed = request.base_seed + std::uint64_t(r);
        c.validate();
        configs.push_back(std::move(c));
        RunResult rr;
        rr.run = int(report.runs.size());
        rr.run_index = r;
        report.runs.push_back(std::move(rr));
      }

  int jobs = request.jobs > 0 ? request.jobs : int(std::max(1u, std::thread::hardware_concurrency()));
  jobs = std::min<int>(jobs, int(configs.size()));
  std::atomic<std::size_t> next{0};
  std::mutex mutex;
  std::exception_ptr error;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next++;
      if (i >= configs.size()) return;
      try {
        MissionLog log = run_mission(configs[i]);
        std::lock_guard lock(mutex);
        report.runs[i].log = std::move(log);
        if (on_run) on_run(report.runs[i]);
      } catch (...) {
        std::lock_guard lock(mutex);
        if (!error) error = std::current_exception();
        next = configs.size();
      }
    }
  };
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
  }
  if (error) std::rethrow_exception(error);

  const std::size_t group_size = std::size_t(request.runs);
  for (std::size_t begin = 0; begin < report.runs.size(); begin += group_size) {
    std::vector<const RunResult*> group;
    for (std::size_t i = begin; i < begin + group_size; ++i) group.push_back(&report.runs[i]);
    report.groups.push_back(aggregate_group(group));
  }
  return report;
}

}  // namespace eaae
