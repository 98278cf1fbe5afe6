#pragma once

// Internal JSON helpers shared by config, checkpoint and results code.
// Not installed; public headers stay free of the vendored json type.

#include <set>
#include <string>

#include "dlinoss/config.hpp"
#include "json.hpp"

namespace dlinoss::detail {

using json = nlohmann::json;

void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed,
                         const std::string& context);

json model_config_to_json(const ModelConfig& config);
ModelConfig model_config_from_json(const json& j);

json init_spec_to_json(const InitSpec& spec);
InitSpec init_spec_from_json(const json& j);

json train_options_to_json(const TrainOptions& options);
TrainOptions train_options_from_json(const json& j);

json task_config_to_json(const TaskConfig& task);
TaskConfig task_config_from_json(const json& j);

}  // namespace dlinoss::detail
