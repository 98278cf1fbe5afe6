#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dlinoss/model.hpp"

namespace dlinoss {

// In-memory dataset of sequences with either per-step regression targets,
// sequence-level regression targets, or classification labels.
struct Dataset {
  std::size_t features = 1;
  std::size_t target_dim = 1;   // regression width, or class count
  bool per_step_targets = false;
  bool classification = false;

  std::vector<std::vector<double>> inputs;   // per sequence, [len][features]
  std::vector<std::vector<double>> targets;  // regression targets
  std::vector<int> labels;                   // classification labels
  std::vector<std::size_t> lengths;

  std::vector<std::size_t> train_idx, val_idx, test_idx;

  std::size_t size() const { return inputs.size(); }
  void validate() const;
};

// Padded batch assembled from dataset rows; targets mirror the readout
// (per-step targets are zero-padded past each sequence's length).
struct TargetBatch {
  bool per_step = false;
  bool classification = false;
  std::size_t dim = 1;
  std::vector<double> values;  // [items][max_len][dim] or [items][dim]
  std::vector<int> labels;     // [items]
};
struct Batch {
  SeqBatch inputs;
  TargetBatch targets;
};
Batch make_batch(const Dataset& data, std::span<const std::size_t> indices);

// Exponentially decaying scalar system driven by white noise:
//   x_k = a x_{k-1} + b u_k,  y_k = c x_k + d u_k,  x_0 = 0.
struct DecayTaskSpec {
  double a = 0.8;
  double b = 1.0;
  double c = 1.0;
  double d = 0.0;
  std::size_t seq_len = 1000;
  std::size_t n_train = 512;
  std::size_t n_val = 64;
  std::size_t n_test = 128;
  std::uint64_t seed = 12345;

  void validate() const;
};
Dataset gen_decay(const DecayTaskSpec& spec);

// Adding task: a value channel of uniform [0,1] noise, a marker channel
// flagging exactly two positions, target = sum of the two marked values.
struct AddingTaskSpec {
  std::size_t seq_len = 500;
  std::size_t n_train = 2048;
  std::size_t n_val = 256;
  std::size_t n_test = 256;
  std::uint64_t seed = 12345;

  void validate() const;
};
Dataset gen_adding(const AddingTaskSpec& spec);

// CSV ingestion. Column convention (optional header row):
//   sequence_id, step, feature_0, ..., feature_{F-1}, target
// Rows are grouped by sequence id (appearance order) and sorted by step.
// In SequenceLabel mode the target column carries the per-sequence label,
// read from the final row of each sequence.
enum class CsvTargetSchema { PerStep, SequenceLabel };
struct CsvIngestOptions {
  CsvTargetSchema schema = CsvTargetSchema::PerStep;
  bool classification = false;  // SequenceLabel only: treat labels as classes
  double train_frac = 0.70;
  double val_frac = 0.15;  // test gets the remainder (floor val, rest to test)
  std::uint64_t shuffle_seed = 0;
};
Dataset ingest_csv(const std::string& path, const CsvIngestOptions& options);

// Seeded 70-15-15-style split: train = floor(train_frac*n),
// val = floor(val_frac*n), test = remainder.
void assign_splits(Dataset& data, double train_frac, double val_frac, std::uint64_t seed);

}  // namespace dlinoss
