#ifndef CSGP_CONFIG_HPP_
#define CSGP_CONFIG_HPP_

#include <string>
#include <vector>

#include <json.hpp>

#include "csgp/harness.hpp"

namespace csgp {

// Parses and validates an experiment config. Unknown keys anywhere in the
// document are hard errors naming the offending key path.
ExperimentConfig parse_config(const nlohmann::json& j);

// Reads a config file (JSON, // comments allowed), applies dotted-key
// overrides ("experiment.T=5"), then parses.
ExperimentConfig load_config(const std::string& path,
                             const std::vector<std::string>& overrides = {});

// Full echo of a resolved config, defaults included. Feeding the echo back
// through parse_config reproduces the experiment exactly.
nlohmann::json config_to_json(const ExperimentConfig& config);

// Applies one "dotted.key=value" override in place; value is parsed as JSON
// when possible and treated as a string otherwise.
void apply_override(nlohmann::json& j, const std::string& spec);

}  // namespace csgp

#endif  // CSGP_CONFIG_HPP_
