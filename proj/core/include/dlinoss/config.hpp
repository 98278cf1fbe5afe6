#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dlinoss/init.hpp"
#include "dlinoss/model.hpp"
#include "dlinoss/tasks.hpp"
#include "dlinoss/train.hpp"

namespace dlinoss {

// Task selection for a run. The CSV task points at an external file; the
// synthetic tasks carry their generator specs.
struct TaskConfig {
  enum class Kind { Decay, Adding, Csv };
  Kind kind = Kind::Decay;
  DecayTaskSpec decay;
  AddingTaskSpec adding;
  struct CsvSpec {
    std::string path;
    CsvIngestOptions options;
  } csv;

  std::string name() const;
};

Dataset build_dataset(const TaskConfig& task);

// One run configuration file: task, model, init and train blocks plus the
// output directory and the seed list. JSON on disk; unknown keys anywhere
// are rejected.
struct RunConfig {
  TaskConfig task;
  ModelConfig model;  // input/output dims are inferred from the task
  InitSpec init;
  TrainOptions train;
  std::string out = "runs";
  std::vector<std::uint64_t> seeds = {0};
};

RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::string& path);
std::string run_config_to_json(const RunConfig& config);

// Fills model.input_dim / model.output_dim (and target conventions) from the
// dataset; throws ConfigError on readout/task mismatches.
void resolve_model_for_dataset(ModelConfig& model, const Dataset& data);

}  // namespace dlinoss
