#include "eaae/bench.hpp"

#include <json.hpp>

#include <charconv>
#include <fstream>
#include <sstream>

namespace eaae {

namespace {

// 17 significant digits: reads back to the same double.
std::string num(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, r.ptr);
}

double parse_double(std::string_view s, std::size_t line) {
  double v = 0.0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size())
    throw std::runtime_error("series line " + std::to_string(line) + ": bad number '" + std::string(s) + "'");
  return v;
}

nlohmann::json stats_json(const MetricStats& s) {
  return {{"median", s.median}, {"mean", s.mean}, {"min", s.min}, {"max", s.max}};
}

}  // namespace

std::string summary_row(const RunResult& run) {
  const auto& s = run.log.summary;
  std::ostringstream os;
  os << run.run << ',' << run.log.scenario << ',' << to_string(run.log.policy) << ',' << run.log.seed << ','
     << num(s.completion_time) << ',' << num(s.total_energy) << ',' << num(s.mean_power) << ','
     << num(s.final_entropy) << ',' << to_string(s.termination) << ',' << num(s.explored_fraction) << ','
     << s.cycles;
  return os.str();
}

std::string series_csv(const std::vector<SeriesPoint>& series) {
  std::string out = std::string(kSeriesHeader) + "\n";
  for (const auto& p : series)
    out += num(p.t) + ',' + num(p.explored_fraction) + ',' + num(p.cum_energy) + ',' + num(p.entropy) + '\n';
  return out;
}

std::vector<SeriesPoint> parse_series_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line) || line != kSeriesHeader)
    throw std::runtime_error("series header must be '" + std::string(kSeriesHeader) + "'");
  std::vector<SeriesPoint> out;
  for (std::size_t n = 2; std::getline(is, line); ++n) {
    if (line.empty()) continue;
    std::vector<std::string_view> f;
    std::string_view rest(line);
    for (std::size_t pos; (pos = rest.find(',')) != std::string_view::npos; rest.remove_prefix(pos + 1))
      f.push_back(rest.substr(0, pos));
    f.push_back(rest);
    if (f.size() != 4) throw std::runtime_error("series line " + std::to_string(n) + ": expected 4 fields");
    out.push_back({parse_double(f[0], n), parse_double(f[1], n), parse_double(f[2], n), parse_double(f[3], n)});
  }
  return out;
}

std::vector<SeriesPoint> read_series_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_series_csv(ss.str());
  } catch (const std::runtime_error& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

std::string cycle_timings_csv(const std::vector<RunResult>& runs) {
  std::string out = "run,scenario,policy,cycle,clustering_ms,trajectory_ms,energy_ms\n";
  for (const auto& r : runs)
    for (const auto& c : r.log.cycles)
      out += std::to_string(r.run) + ',' + r.log.scenario + ',' + to_string(r.log.policy) + ',' +
             std::to_string(c.cycle) + ',' + num(c.timings.clustering_ms) + ',' + num(c.timings.trajectory_ms) + ',' +
             num(c.timings.energy_ms) + '\n';
  return out;
}

std::string timings_csv(const BenchmarkReport& report) {
  std::string out = "scenario,policy,clustering_ms,trajectory_ms,energy_ms\n";
  for (const auto& g : report.groups)
    out += g.scenario + ',' + to_string(g.policy) + ',' + num(g.mean_timings.clustering_ms) + ',' +
           num(g.mean_timings.trajectory_ms) + ',' + num(g.mean_timings.energy_ms) + '\n';
  return out;
}

std::string report_json(const BenchmarkReport& report) {
  nlohmann::json groups = nlohmann::json::array();
  for (const auto& g : report.groups) {
    nlohmann::json runs = nlohmann::json::array();
    for (int id : g.runs) {
      const auto& r = report.runs[std::size_t(id)];
      const auto& s = r.log.summary;
      runs.push_back({{"run", r.run},
                      {"seed", r.log.seed},
                      {"completion_s", s.completion_time},
                      {"energy_J", s.total_energy},
                      {"mean_power_W", s.mean_power},
                      {"entropy_bits", s.final_entropy},
                      {"explored_fraction", s.explored_fraction},
                      {"termination", to_string(s.termination)},
                      {"cycles", s.cycles}});
    }
    groups.push_back({{"scenario", g.scenario},
                      {"policy", to_string(g.policy)},
                      {"runs", runs},
                      {"completion_s", stats_json(g.completion_time)},
                      {"energy_J", stats_json(g.total_energy)},
                      {"mean_power_W", stats_json(g.mean_power)},
                      {"entropy_bits", stats_json(g.final_entropy)},
                      {"explored_fraction", stats_json(g.explored_fraction)},
                      {"timings_ms",
                       {{"clustering", g.mean_timings.clustering_ms},
                        {"trajectory", g.mean_timings.trajectory_ms},
                        {"energy", g.mean_timings.energy_ms}}}});
  }
  return nlohmann::json{{"groups", groups}}.dump(2) + "\n";
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) throw std::runtime_error("cannot create " + path.parent_path().string() + ": " + ec.message());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << text;
  out.close();
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

void emit_outputs(const BenchmarkReport& report, const std::filesystem::path& out_dir) {
  std::string summary = std::string(kSummaryHeader) + "\n";
  for (const auto& r : report.runs) {
    summary += summary_row(r) + "\n";
    write_text_file(out_dir / ("series_" + std::to_string(r.run) + ".csv"), series_csv(r.log.series));
  }
  write_text_file(out_dir / "summary.csv", summary);
  write_text_file(out_dir / "timings.csv", timings_csv(report));
  write_text_file(out_dir / "cycle_timings.csv", cycle_timings_csv(report.runs));
  write_text_file(out_dir / "report.json", report_json(report));
}

}  // namespace eaae
