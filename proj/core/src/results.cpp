#include "dlinoss/results.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "dlinoss/errors.hpp"
#include "json_util.hpp"

namespace dlinoss {

namespace fs = std::filesystem;
using detail::json;

std::string run_dir(const std::string& out_root, const std::string& task,
                    const std::string& variant, std::uint64_t seed) {
  return (fs::path(out_root) / task / variant / std::to_string(seed)).string();
}

namespace {

json record_to_json(const RunRecord& r) {
  json j;
  j["task"] = r.task;
  j["variant"] = r.variant;
  j["seed"] = r.seed;
  j["config"] = r.config_json.empty() ? json(nullptr) : json::parse(r.config_json);
  j["status"] = r.status;
  j["final_metrics"] = r.final_metrics;
  j["steps_to_threshold"] =
      r.steps_to_threshold == kNeverReached ? json(nullptr) : json(r.steps_to_threshold);
  j["steps_run"] = r.steps_run;
  j["wall_ms_total"] = r.wall_ms_total;
  return j;
}

RunRecord record_from_json(const json& j) {
  RunRecord r;
  r.task = j.at("task").get<std::string>();
  r.variant = j.at("variant").get<std::string>();
  r.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("config") && !j.at("config").is_null()) r.config_json = j.at("config").dump();
  r.status = j.value("status", "ok");
  if (j.contains("final_metrics"))
    r.final_metrics = j.at("final_metrics").get<std::map<std::string, double>>();
  if (j.contains("steps_to_threshold") && !j.at("steps_to_threshold").is_null())
    r.steps_to_threshold = j.at("steps_to_threshold").get<std::size_t>();
  r.steps_run = j.value("steps_run", std::size_t{0});
  r.wall_ms_total = j.value("wall_ms_total", 0.0);
  return r;
}

}  // namespace

void write_run(const std::string& dir, const RunRecord& record,
               const std::vector<MetricRow>& history) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create run directory '" + dir + "': " + ec.message());

  {
    std::ofstream out(fs::path(dir) / "result.json");
    if (!out) throw IoError("cannot write result.json under '" + dir + "'");
    out << record_to_json(record).dump(2) << "\n";
  }
  {
    std::ofstream out(fs::path(dir) / "metrics.csv");
    if (!out) throw IoError("cannot write metrics.csv under '" + dir + "'");
    out << "step,split,metric,value,wall_ms\n";
    out.precision(17);
    for (const auto& row : history)
      out << row.step << ',' << row.split << ',' << row.metric << ',' << row.value << ','
          << row.wall_ms << "\n";
  }
}

std::vector<RunRecord> load_results(const std::string& root) {
  if (!fs::exists(root)) throw IoError("results directory '" + root + "' does not exist");
  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(root))
    if (entry.is_regular_file() && entry.path().filename() == "result.json")
      files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  std::vector<RunRecord> records;
  for (const auto& file : files) {
    std::ifstream in(file);
    json j;
    try {
      in >> j;
      records.push_back(record_from_json(j));
    } catch (const json::exception& e) {
      throw IoError("corrupt result document '" + file.string() + "': " + e.what());
    }
  }
  return records;
}

std::string summarize_results(const std::vector<RunRecord>& records) {
  // group by (task, variant), preserve first-seen order
  std::vector<std::pair<std::string, std::string>> keys;
  auto key_index = [&](const RunRecord& r) {
    for (std::size_t i = 0; i < keys.size(); ++i)
      if (keys[i].first == r.task && keys[i].second == r.variant) return i;
    keys.emplace_back(r.task, r.variant);
    return keys.size() - 1;
  };
  std::vector<std::vector<const RunRecord*>> groups;
  for (const auto& r : records) {
    const std::size_t idx = key_index(r);
    if (groups.size() <= idx) groups.resize(idx + 1);
    groups[idx].push_back(&r);
  }

  json rows = json::array();
  for (std::size_t i = 0; i < keys.size(); ++i) {
    json row;
    row["task"] = keys[i].first;
    row["variant"] = keys[i].second;
    row["runs"] = groups[i].size();

    std::map<std::string, std::vector<double>> metric_values;
    std::size_t reached = 0;
    std::size_t best_steps = kNeverReached;
    std::size_t diverged = 0;
    for (const auto* r : groups[i]) {
      for (const auto& [name, value] : r->final_metrics) metric_values[name].push_back(value);
      if (r->steps_to_threshold != kNeverReached) {
        ++reached;
        best_steps = std::min(best_steps, r->steps_to_threshold);
      }
      if (r->status != "ok") ++diverged;
    }
    json metrics;
    for (const auto& [name, values] : metric_values) {
      double mean = 0.0;
      for (double v : values) mean += v;
      mean /= static_cast<double>(values.size());
      double var = 0.0;
      for (double v : values) var += (v - mean) * (v - mean);
      var /= static_cast<double>(values.size());
      metrics[name] = {{"mean", mean}, {"std", std::sqrt(var)}};
    }
    row["metrics"] = metrics;
    row["threshold_reached"] = reached;
    row["best_steps_to_threshold"] =
        best_steps == kNeverReached ? json(nullptr) : json(best_steps);
    row["failed_runs"] = diverged;
    rows.push_back(row);
  }
  json out;
  out["summary"] = rows;
  return out.dump(2);
}

}  // namespace dlinoss
