#include "dlinoss/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "dlinoss/errors.hpp"
#include "json_util.hpp"

namespace dlinoss {

namespace detail {

void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed,
                         const std::string& context) {
  if (!obj.is_object()) throw ConfigError(context + " must be a JSON object");
  for (const auto& item : obj.items())
    if (!allowed.count(item.key()))
      throw ConfigError("unknown key '" + item.key() + "' in " + context);
}

namespace {

template <typename T>
T get_or(const json& j, const std::string& key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("bad value for '" + key + "'");
  }
}

}  // namespace

json model_config_to_json(const ModelConfig& config) {
  return json{{"variant", variant_name(config.variant)},
              {"num_blocks", config.num_blocks},
              {"hidden_dim", config.hidden_dim},
              {"state_dim", config.state_dim},
              {"readout", readout_name(config.readout)},
              {"include_time", config.include_time}};
}

ModelConfig model_config_from_json(const json& j) {
  reject_unknown_keys(
      j, {"variant", "num_blocks", "hidden_dim", "state_dim", "readout", "include_time"},
      "model block");
  ModelConfig config;
  config.variant = variant_from_name(get_or<std::string>(j, "variant", "dlinoss"));
  config.num_blocks = get_or<std::size_t>(j, "num_blocks", config.num_blocks);
  config.hidden_dim = get_or<std::size_t>(j, "hidden_dim", config.hidden_dim);
  config.state_dim = get_or<std::size_t>(j, "state_dim", config.state_dim);
  if (j.contains("readout"))
    config.readout = readout_from_name(j.at("readout").get<std::string>());
  config.include_time = get_or<bool>(j, "include_time", config.include_time);
  return config;
}

json init_spec_to_json(const InitSpec& spec) {
  return json{{"scheme", init_scheme_name(spec.scheme)}, {"r_min", spec.r_min},
              {"r_max", spec.r_max},                     {"theta_min", spec.theta_min},
              {"theta_max", spec.theta_max},             {"a_min", spec.a_min},
              {"a_max", spec.a_max},                     {"g_max", spec.g_max}};
}

InitSpec init_spec_from_json(const json& j) {
  reject_unknown_keys(
      j, {"scheme", "r_min", "r_max", "theta_min", "theta_max", "a_min", "a_max", "g_max"},
      "init block");
  InitSpec spec;
  if (j.contains("scheme")) spec.scheme = init_scheme_from_name(j.at("scheme").get<std::string>());
  spec.r_min = get_or<double>(j, "r_min", spec.r_min);
  spec.r_max = get_or<double>(j, "r_max", spec.r_max);
  spec.theta_min = get_or<double>(j, "theta_min", spec.theta_min);
  spec.theta_max = get_or<double>(j, "theta_max", spec.theta_max);
  spec.a_min = get_or<double>(j, "a_min", spec.a_min);
  spec.a_max = get_or<double>(j, "a_max", spec.a_max);
  spec.g_max = get_or<double>(j, "g_max", spec.g_max);
  spec.validate();
  return spec;
}

json train_options_to_json(const TrainOptions& options) {
  json j{{"lr", options.lr},
         {"batch_size", options.batch_size},
         {"max_steps", options.max_steps},
         {"eval_every", options.eval_every},
         {"patience", options.patience},
         {"loss", options.loss == LossKind::Mse ? "mse" : "cross-entropy"},
         {"val_metric", metric_name(options.val_metric)},
         {"test_metric", metric_name(options.test_metric)},
         {"stop_at_target", options.stop_at_target},
         {"eval_batch", options.eval_batch}};
  if (std::isnan(options.target_val))
    j["target_val"] = nullptr;
  else
    j["target_val"] = options.target_val;
  return j;
}

TrainOptions train_options_from_json(const json& j) {
  reject_unknown_keys(j,
                      {"lr", "batch_size", "max_steps", "eval_every", "patience", "loss",
                       "val_metric", "test_metric", "target_val", "stop_at_target", "eval_batch"},
                      "train block");
  TrainOptions options;
  options.lr = get_or<double>(j, "lr", options.lr);
  options.batch_size = get_or<std::size_t>(j, "batch_size", options.batch_size);
  options.max_steps = get_or<std::size_t>(j, "max_steps", options.max_steps);
  options.eval_every = get_or<std::size_t>(j, "eval_every", options.eval_every);
  options.patience = get_or<std::size_t>(j, "patience", options.patience);
  if (j.contains("loss")) {
    const std::string name = j.at("loss").get<std::string>();
    if (name == "mse")
      options.loss = LossKind::Mse;
    else if (name == "cross-entropy")
      options.loss = LossKind::CrossEntropy;
    else
      throw ConfigError("unknown loss '" + name + "'");
  }
  if (j.contains("val_metric"))
    options.val_metric = metric_from_name(j.at("val_metric").get<std::string>());
  if (j.contains("test_metric"))
    options.test_metric = metric_from_name(j.at("test_metric").get<std::string>());
  if (j.contains("target_val") && !j.at("target_val").is_null())
    options.target_val = j.at("target_val").get<double>();
  options.stop_at_target = get_or<bool>(j, "stop_at_target", options.stop_at_target);
  options.eval_batch = get_or<std::size_t>(j, "eval_batch", options.eval_batch);
  return options;
}

json task_config_to_json(const TaskConfig& task) {
  switch (task.kind) {
    case TaskConfig::Kind::Decay:
      return json{{"name", "decay"},
                  {"a", task.decay.a},
                  {"b", task.decay.b},
                  {"c", task.decay.c},
                  {"d", task.decay.d},
                  {"seq_len", task.decay.seq_len},
                  {"n_train", task.decay.n_train},
                  {"n_val", task.decay.n_val},
                  {"n_test", task.decay.n_test},
                  {"seed", task.decay.seed}};
    case TaskConfig::Kind::Adding:
      return json{{"name", "adding"},
                  {"seq_len", task.adding.seq_len},
                  {"n_train", task.adding.n_train},
                  {"n_val", task.adding.n_val},
                  {"n_test", task.adding.n_test},
                  {"seed", task.adding.seed}};
    case TaskConfig::Kind::Csv: {
      return json{{"name", "csv"},
                  {"path", task.csv.path},
                  {"schema", task.csv.options.schema == CsvTargetSchema::PerStep
                                 ? "per-step"
                                 : "sequence-label"},
                  {"classification", task.csv.options.classification},
                  {"train_frac", task.csv.options.train_frac},
                  {"val_frac", task.csv.options.val_frac},
                  {"shuffle_seed", task.csv.options.shuffle_seed}};
    }
  }
  throw ConfigError("unknown task kind");
}

TaskConfig task_config_from_json(const json& j) {
  if (!j.is_object() || !j.contains("name"))
    throw ConfigError("task block needs a 'name' (decay, adding or csv)");
  const std::string name = j.at("name").get<std::string>();
  TaskConfig task;
  if (name == "decay") {
    reject_unknown_keys(
        j, {"name", "a", "b", "c", "d", "seq_len", "n_train", "n_val", "n_test", "seed"},
        "decay task block");
    task.kind = TaskConfig::Kind::Decay;
    task.decay.a = get_or<double>(j, "a", task.decay.a);
    task.decay.b = get_or<double>(j, "b", task.decay.b);
    task.decay.c = get_or<double>(j, "c", task.decay.c);
    task.decay.d = get_or<double>(j, "d", task.decay.d);
    task.decay.seq_len = get_or<std::size_t>(j, "seq_len", task.decay.seq_len);
    task.decay.n_train = get_or<std::size_t>(j, "n_train", task.decay.n_train);
    task.decay.n_val = get_or<std::size_t>(j, "n_val", task.decay.n_val);
    task.decay.n_test = get_or<std::size_t>(j, "n_test", task.decay.n_test);
    task.decay.seed = get_or<std::uint64_t>(j, "seed", task.decay.seed);
  } else if (name == "adding") {
    reject_unknown_keys(j, {"name", "seq_len", "n_train", "n_val", "n_test", "seed"},
                        "adding task block");
    task.kind = TaskConfig::Kind::Adding;
    task.adding.seq_len = get_or<std::size_t>(j, "seq_len", task.adding.seq_len);
    task.adding.n_train = get_or<std::size_t>(j, "n_train", task.adding.n_train);
    task.adding.n_val = get_or<std::size_t>(j, "n_val", task.adding.n_val);
    task.adding.n_test = get_or<std::size_t>(j, "n_test", task.adding.n_test);
    task.adding.seed = get_or<std::uint64_t>(j, "seed", task.adding.seed);
  } else if (name == "csv") {
    reject_unknown_keys(
        j, {"name", "path", "schema", "classification", "train_frac", "val_frac", "shuffle_seed"},
        "csv task block");
    task.kind = TaskConfig::Kind::Csv;
    if (!j.contains("path")) throw ConfigError("csv task needs a 'path'");
    task.csv.path = j.at("path").get<std::string>();
    const std::string schema = get_or<std::string>(j, "schema", "per-step");
    if (schema == "per-step")
      task.csv.options.schema = CsvTargetSchema::PerStep;
    else if (schema == "sequence-label")
      task.csv.options.schema = CsvTargetSchema::SequenceLabel;
    else
      throw ConfigError("unknown csv schema '" + schema + "'");
    task.csv.options.classification = get_or<bool>(j, "classification", false);
    task.csv.options.train_frac = get_or<double>(j, "train_frac", 0.70);
    task.csv.options.val_frac = get_or<double>(j, "val_frac", 0.15);
    task.csv.options.shuffle_seed = get_or<std::uint64_t>(j, "shuffle_seed", 0);
  } else {
    throw ConfigError("unknown task '" + name + "'");
  }
  return task;
}

}  // namespace detail

std::string TaskConfig::name() const {
  switch (kind) {
    case Kind::Decay: return "decay";
    case Kind::Adding: return "adding-" + std::to_string(adding.seq_len);
    case Kind::Csv: return "csv";
  }
  return "?";
}

Dataset build_dataset(const TaskConfig& task) {
  switch (task.kind) {
    case TaskConfig::Kind::Decay: return gen_decay(task.decay);
    case TaskConfig::Kind::Adding: return gen_adding(task.adding);
    case TaskConfig::Kind::Csv: return ingest_csv(task.csv.path, task.csv.options);
  }
  throw ConfigError("unknown task kind");
}

void resolve_model_for_dataset(ModelConfig& model, const Dataset& data) {
  model.input_dim = data.features;
  model.output_dim = data.target_dim;
  if (data.per_step_targets && model.readout != Readout::PerStep)
    throw ConfigError("per-step targets require the per-step readout");
  if (!data.per_step_targets && model.readout == Readout::PerStep)
    throw ConfigError("sequence-level targets cannot use the per-step readout");
  model.validate();
}

RunConfig parse_run_config(const std::string& json_text) {
  detail::json j;
  try {
    j = detail::json::parse(json_text);
  } catch (const detail::json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  detail::reject_unknown_keys(j, {"task", "model", "init", "train", "out", "seeds"},
                              "run config");
  RunConfig config;
  if (!j.contains("task")) throw ConfigError("run config needs a 'task' block");
  config.task = detail::task_config_from_json(j.at("task"));
  if (j.contains("model")) config.model = detail::model_config_from_json(j.at("model"));
  if (j.contains("init")) config.init = detail::init_spec_from_json(j.at("init"));
  if (j.contains("train")) config.train = detail::train_options_from_json(j.at("train"));
  if (j.contains("out")) config.out = j.at("out").get<std::string>();
  if (j.contains("seeds")) {
    if (!j.at("seeds").is_array() || j.at("seeds").empty())
      throw ConfigError("'seeds' must be a non-empty array");
    config.seeds.clear();
    for (const auto& s : j.at("seeds")) config.seeds.push_back(s.get<std::uint64_t>());
  }
  return config;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str());
}

std::string run_config_to_json(const RunConfig& config) {
  detail::json j;
  j["task"] = detail::task_config_to_json(config.task);
  j["model"] = detail::model_config_to_json(config.model);
  j["init"] = detail::init_spec_to_json(config.init);
  j["train"] = detail::train_options_to_json(config.train);
  j["out"] = config.out;
  j["seeds"] = config.seeds;
  return j.dump(2);
}

}  // namespace dlinoss
