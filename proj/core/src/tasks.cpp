#include "dlinoss/tasks.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "dlinoss/errors.hpp"
#include "dlinoss/rng.hpp"

namespace dlinoss {

void Dataset::validate() const {
  const std::size_t n = inputs.size();
  if (lengths.size() != n) throw ConfigError("dataset needs one length per sequence");
  if (classification) {
    if (labels.size() != n) throw ConfigError("classification dataset needs one label per sequence");
  } else if (targets.size() != n) {
    throw ConfigError("regression dataset needs one target row per sequence");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (inputs[i].size() != lengths[i] * features)
      throw ConfigError("sequence buffer does not match its length");
    if (!classification) {
      const std::size_t want = per_step_targets ? lengths[i] * target_dim : target_dim;
      if (targets[i].size() != want) throw ConfigError("target buffer has the wrong size");
    }
  }
}

Batch make_batch(const Dataset& data, std::span<const std::size_t> indices) {
  if (indices.empty()) throw ConfigError("batch needs at least one sequence");
  Batch batch;
  std::size_t max_len = 0;
  for (std::size_t idx : indices) max_len = std::max(max_len, data.lengths[idx]);

  SeqBatch& in = batch.inputs;
  in.items = indices.size();
  in.max_len = max_len;
  in.features = data.features;
  in.x.assign(in.items * max_len * data.features, 0.0);
  in.lengths.resize(in.items);

  TargetBatch& tg = batch.targets;
  tg.per_step = data.per_step_targets;
  tg.classification = data.classification;
  tg.dim = data.target_dim;
  if (data.classification) {
    tg.labels.resize(in.items);
  } else {
    tg.values.assign(in.items * (tg.per_step ? max_len * tg.dim : tg.dim), 0.0);
  }

  for (std::size_t r = 0; r < indices.size(); ++r) {
    const std::size_t idx = indices[r];
    const std::size_t len = data.lengths[idx];
    in.lengths[r] = len;
    std::copy(data.inputs[idx].begin(), data.inputs[idx].end(),
              in.x.begin() + r * max_len * data.features);
    if (data.classification) {
      tg.labels[r] = data.labels[idx];
    } else if (tg.per_step) {
      std::copy(data.targets[idx].begin(), data.targets[idx].end(),
                tg.values.begin() + r * max_len * tg.dim);
    } else {
      std::copy(data.targets[idx].begin(), data.targets[idx].end(),
                tg.values.begin() + r * tg.dim);
    }
  }
  return batch;
}

void DecayTaskSpec::validate() const {
  if (!(std::abs(a) < 1.0)) throw ConfigError("decay task requires |a| < 1 for a stable target");
  if (seq_len < 1) throw ConfigError("decay task needs seq_len >= 1");
  if (n_train + n_val + n_test == 0) throw ConfigError("decay task needs at least one sequence");
}

Dataset gen_decay(const DecayTaskSpec& spec) {
  spec.validate();
  const std::size_t n = spec.n_train + spec.n_val + spec.n_test;
  Dataset data;
  data.features = 1;
  data.target_dim = 1;
  data.per_step_targets = true;
  data.inputs.resize(n);
  data.targets.resize(n);
  data.lengths.assign(n, spec.seq_len);

  Rng base(spec.seed);
  for (std::size_t s = 0; s < n; ++s) {
    Rng rng = base.fork(s);
    auto& u = data.inputs[s];
    auto& y = data.targets[s];
    u.resize(spec.seq_len);
    y.resize(spec.seq_len);
    double x = 0.0;
    for (std::size_t k = 0; k < spec.seq_len; ++k) {
      u[k] = rng.normal();
      x = spec.a * x + spec.b * u[k];
      y[k] = spec.c * x + spec.d * u[k];
    }
  }
  data.train_idx.resize(spec.n_train);
  data.val_idx.resize(spec.n_val);
  data.test_idx.resize(spec.n_test);
  std::iota(data.train_idx.begin(), data.train_idx.end(), 0);
  std::iota(data.val_idx.begin(), data.val_idx.end(), spec.n_train);
  std::iota(data.test_idx.begin(), data.test_idx.end(), spec.n_train + spec.n_val);
  return data;
}

void AddingTaskSpec::validate() const {
  if (seq_len < 2) throw ConfigError("adding task needs seq_len >= 2 (two marked positions)");
  if (n_train + n_val + n_test == 0) throw ConfigError("adding task needs at least one sequence");
}

Dataset gen_adding(const AddingTaskSpec& spec) {
  spec.validate();
  const std::size_t n = spec.n_train + spec.n_val + spec.n_test;
  Dataset data;
  data.features = 2;  // value channel, marker channel
  data.target_dim = 1;
  data.per_step_targets = false;
  data.inputs.resize(n);
  data.targets.resize(n);
  data.lengths.assign(n, spec.seq_len);

  Rng base(spec.seed);
  for (std::size_t s = 0; s < n; ++s) {
    Rng rng = base.fork(s);
    auto& u = data.inputs[s];
    u.assign(spec.seq_len * 2, 0.0);
    for (std::size_t k = 0; k < spec.seq_len; ++k) u[k * 2] = rng.uniform();
    // two marker positions drawn without replacement
    const std::size_t p1 = rng.uniform_index(spec.seq_len);
    std::size_t p2 = rng.uniform_index(spec.seq_len - 1);
    if (p2 >= p1) ++p2;
    u[p1 * 2 + 1] = 1.0;
    u[p2 * 2 + 1] = 1.0;
    data.targets[s] = {u[p1 * 2] + u[p2 * 2]};
  }
  data.train_idx.resize(spec.n_train);
  data.val_idx.resize(spec.n_val);
  data.test_idx.resize(spec.n_test);
  std::iota(data.train_idx.begin(), data.train_idx.end(), 0);
  std::iota(data.val_idx.begin(), data.val_idx.end(), spec.n_train);
  std::iota(data.test_idx.begin(), data.test_idx.end(), spec.n_train + spec.n_val);
  return data;
}

void assign_splits(Dataset& data, double train_frac, double val_frac, std::uint64_t seed) {
  if (!(train_frac >= 0.0 && val_frac >= 0.0 && train_frac + val_frac <= 1.0))
    throw ConfigError("split fractions must be non-negative and sum to <= 1");
  const std::size_t n = data.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  for (std::size_t i = n; i > 1; --i)
    std::swap(order[i - 1], order[rng.uniform_index(i)]);
  const std::size_t n_train = static_cast<std::size_t>(std::floor(train_frac * n));
  const std::size_t n_val = static_cast<std::size_t>(std::floor(val_frac * n));
  data.train_idx.assign(order.begin(), order.begin() + n_train);
  data.val_idx.assign(order.begin() + n_train, order.begin() + n_train + n_val);
  data.test_idx.assign(order.begin() + n_train + n_val, order.end());
}

namespace {

bool parse_cell(const std::string& cell, double& out) {
  const char* begin = cell.c_str();
  char* end = nullptr;
  out = std::strtod(begin, &end);
  if (end == begin) return false;
  while (*end == ' ' || *end == '\t' || *end == '\r') ++end;
  return *end == '\0';
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

}  // namespace

Dataset ingest_csv(const std::string& path, const CsvIngestOptions& options) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open CSV file '" + path + "'");

  struct Row {
    double step;
    std::vector<double> feats;
    double target;
  };
  std::map<long long, std::vector<Row>> by_seq;
  std::vector<long long> seq_order;

  std::string line;
  std::size_t line_no = 0;
  std::size_t n_cols = 0;
  bool first_content_row = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    auto cells = split_csv_line(line);
    if (first_content_row) {
      // allow a header row: skip it when its cells are not all numeric
      double probe;
      bool numeric = true;
      for (const auto& c : cells)
        if (!parse_cell(c, probe)) {
          numeric = false;
          break;
        }
      first_content_row = false;
      if (!numeric) continue;
    }
    if (n_cols == 0) {
      n_cols = cells.size();
      if (n_cols < 4)
        throw ConfigError("CSV needs at least 4 columns (sequence id, step, features..., target); '" +
                          path + "' has " + std::to_string(cells.size()));
    } else if (cells.size() != n_cols) {
      throw ConfigError("ragged CSV row at line " + std::to_string(line_no) + " of '" + path +
                        "': expected " + std::to_string(n_cols) + " cells, got " +
                        std::to_string(cells.size()));
    }
    std::vector<double> vals(n_cols);
    for (std::size_t c = 0; c < n_cols; ++c) {
      if (!parse_cell(cells[c], vals[c]))
        throw ConfigError("non-numeric cell '" + cells[c] + "' at line " +
                          std::to_string(line_no) + ", column " + std::to_string(c + 1) +
                          " of '" + path + "'");
    }
    const long long sid = static_cast<long long>(vals[0]);
    if (by_seq.find(sid) == by_seq.end()) seq_order.push_back(sid);
    Row row;
    row.step = vals[1];
    row.feats.assign(vals.begin() + 2, vals.end() - 1);
    row.target = vals.back();
    by_seq[sid].push_back(std::move(row));
  }
  if (by_seq.empty())
    throw ConfigError("CSV '" + path + "' contains no data rows (missing target column?)");

  Dataset data;
  data.features = n_cols - 3;
  data.target_dim = 1;
  data.per_step_targets = options.schema == CsvTargetSchema::PerStep;
  data.classification =
      options.schema == CsvTargetSchema::SequenceLabel && options.classification;

  int max_label = -1;
  for (long long sid : seq_order) {
    auto& rows = by_seq[sid];
    std::stable_sort(rows.begin(), rows.end(),
                     [](const Row& a, const Row& b) { return a.step < b.step; });
    std::vector<double> seq;
    seq.reserve(rows.size() * data.features);
    std::vector<double> tgt;
    for (const auto& row : rows) {
      seq.insert(seq.end(), row.feats.begin(), row.feats.end());
      if (data.per_step_targets) tgt.push_back(row.target);
    }
    data.inputs.push_back(std::move(seq));
    data.lengths.push_back(rows.size());
    if (data.classification) {
      const int label = static_cast<int>(rows.back().target);
      if (label < 0) throw ConfigError("class labels must be non-negative integers");
      max_label = std::max(max_label, label);
      data.labels.push_back(label);
    } else if (data.per_step_targets) {
      data.targets.push_back(std::move(tgt));
    } else {
      data.targets.push_back({rows.back().target});
    }
  }
  if (data.classification) data.target_dim = static_cast<std::size_t>(max_label) + 1;

  assign_splits(data, options.train_frac, options.val_frac, options.shuffle_seed);
  data.validate();
  return data;
}

}  // namespace dlinoss
