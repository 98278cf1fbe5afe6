#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "dlinoss/train.hpp"

namespace dlinoss {

// One completed run, serialized as result.json next to its metrics.csv in
// <out>/<task>/<variant>/<seed>/.
struct RunRecord {
  std::string task;
  std::string variant;
  std::uint64_t seed = 0;
  std::string config_json;  // resolved run config echo
  std::string status = "ok";
  std::map<std::string, double> final_metrics;
  std::size_t steps_to_threshold = kNeverReached;
  std::size_t steps_run = 0;
  double wall_ms_total = 0.0;
};

std::string run_dir(const std::string& out_root, const std::string& task,
                    const std::string& variant, std::uint64_t seed);

// Writes result.json and metrics.csv (header: step,split,metric,value,wall_ms).
void write_run(const std::string& dir, const RunRecord& record,
               const std::vector<MetricRow>& history);

// Recursively collects result.json documents under a results root.
std::vector<RunRecord> load_results(const std::string& root);

// Stable-schema JSON summary: one row per (task, variant) with per-metric
// mean and population standard deviation plus threshold statistics. Both the
// bench commands and `report` build their tables through this function, so a
// report over stored runs reproduces the bench summary exactly.
std::string summarize_results(const std::vector<RunRecord>& records);

}  // namespace dlinoss
