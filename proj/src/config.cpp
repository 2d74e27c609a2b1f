#include "csgp/config.hpp"

#include <fstream>
#include <set>

#include "csgp/errors.hpp"

namespace csgp {

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& j, const std::set<std::string>& allowed,
                         const std::string& path) {
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (allowed.find(key) == allowed.end()) {
      throw ConfigError("unknown config key: " + path + key);
    }
  }
}

template <typename T>
T get_or(const json& j, const std::string& key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError("bad value for config key '" + key + "': " + e.what());
  }
}

PolicyArm parse_policy(const json& j, const ExperimentConfig& config) {
  PolicyArm arm;
  std::string name;
  if (j.is_string()) {
    name = j.get<std::string>();
  } else if (j.is_object()) {
    reject_unknown_keys(j, {"name", "alpha_override", "draws", "burn_in"},
                        "policies[].");
    if (!j.contains("name")) {
      throw ConfigError("policy entry missing 'name'");
    }
    name = j.at("name").get<std::string>();
  } else {
    throw ConfigError("policy entries must be strings or objects");
  }
  arm.name = name;
  arm.config.kind = parse_policy_kind(name);
  arm.config.schedule = config.schedule();
  arm.config.sampler = config.sampler;
  if (j.is_object()) {
    if (j.contains("alpha_override")) {
      arm.config.alpha_override = j.at("alpha_override").get<double>();
    }
    arm.config.sampler.draws = get_or(j, "draws", arm.config.sampler.draws);
    arm.config.sampler.burn_in =
        get_or(j, "burn_in", arm.config.sampler.burn_in);
  }
  return arm;
}

}  // namespace

ExperimentConfig parse_config(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config root must be an object");
  reject_unknown_keys(j,
                      {"experiment", "env", "kernel", "basis", "sampler",
                       "schedule", "policies", "output"},
                      "");
  ExperimentConfig config;

  if (j.contains("experiment")) {
    const json& e = j.at("experiment");
    reject_unknown_keys(e,
                        {"T", "n_init", "grid_size", "replications",
                         "base_seed", "delta", "refit_cadence", "refit_budget",
                         "conditioning_window", "record_wall_ms",
                         "dump_diagnostics", "jobs"},
                        "experiment.");
    config.T = get_or(e, "T", config.T);
    config.n_init = get_or(e, "n_init", config.n_init);
    config.grid_size = get_or(e, "grid_size", config.grid_size);
    config.replications = get_or(e, "replications", config.replications);
    config.base_seed = get_or(e, "base_seed", config.base_seed);
    config.delta = get_or(e, "delta", config.delta);
    config.refit_cadence = get_or(e, "refit_cadence", config.refit_cadence);
    config.refit_budget = get_or(e, "refit_budget", config.refit_budget);
    config.conditioning_window =
        get_or(e, "conditioning_window", config.conditioning_window);
    config.record_wall_ms =
        get_or(e, "record_wall_ms", config.record_wall_ms);
    config.dump_diagnostics =
        get_or(e, "dump_diagnostics", config.dump_diagnostics);
    config.jobs = get_or(e, "jobs", config.jobs);
  }

  if (j.contains("env")) {
    const json& e = j.at("env");
    reject_unknown_keys(e,
                        {"type", "d", "theta", "S", "noise_var", "seed",
                         "fine_grid_size", "optimum_grid_size",
                         "action_lengthscale"},
                        "env.");
    const std::string type = get_or<std::string>(e, "type", "warfarin");
    if (type == "warfarin") {
      config.env.type = EnvConfig::Type::kWarfarin;
    } else if (type == "synthetic") {
      config.env.type = EnvConfig::Type::kSynthetic;
    } else {
      throw ConfigError("env.type must be 'warfarin' or 'synthetic'");
    }
    config.env.d = get_or(e, "d", config.env.d);
    config.env.theta = get_or(e, "theta", config.env.theta);
    config.env.S = get_or(e, "S", config.env.S);
    config.env.noise_var = get_or(e, "noise_var", config.env.noise_var);
    config.env.seed = get_or(e, "seed", config.env.seed);
    config.env.fine_grid_size =
        get_or(e, "fine_grid_size", config.env.fine_grid_size);
    config.env.optimum_grid_size =
        get_or(e, "optimum_grid_size", config.env.optimum_grid_size);
    config.env.action_lengthscale =
        get_or(e, "action_lengthscale", config.env.action_lengthscale);
  }

  if (j.contains("kernel")) {
    const json& k = j.at("kernel");
    reject_unknown_keys(
        k, {"family", "lengthscale", "variance", "matern_nu", "tied"},
        "kernel.");
    config.kernel.family = parse_kernel_family(
        get_or<std::string>(k, "family", "gaussian"));
    config.kernel.lengthscale =
        get_or(k, "lengthscale", config.kernel.lengthscale);
    config.kernel.variance = get_or(k, "variance", config.kernel.variance);
    config.kernel.matern_nu = get_or(k, "matern_nu", config.kernel.matern_nu);
    config.tied = get_or(k, "tied", config.tied);
  }

  if (j.contains("basis")) {
    const json& b = j.at("basis");
    reject_unknown_keys(b, {"num_interior_knots", "order_k"}, "basis.");
    config.num_interior_knots =
        get_or(b, "num_interior_knots", config.num_interior_knots);
    config.order_k = get_or(b, "order_k", config.order_k);
  }

  if (j.contains("sampler")) {
    const json& s = j.at("sampler");
    reject_unknown_keys(s, {"draws", "burn_in"}, "sampler.");
    config.sampler.draws = get_or(s, "draws", config.sampler.draws);
    config.sampler.burn_in = get_or(s, "burn_in", config.sampler.burn_in);
  }

  if (j.contains("schedule")) {
    const json& s = j.at("schedule");
    reject_unknown_keys(s, {"variant", "eta", "zeta"}, "schedule.");
    const std::string variant = get_or<std::string>(s, "variant", "discrete");
    if (variant == "discrete") {
      config.alpha_variant = AlphaSchedule::Variant::kDiscrete;
    } else if (variant == "continuous") {
      config.alpha_variant = AlphaSchedule::Variant::kContinuous;
    } else {
      throw ConfigError("schedule.variant must be 'discrete' or 'continuous'");
    }
    config.eta = get_or(s, "eta", config.eta);
    config.zeta = get_or(s, "zeta", config.zeta);
  }

  if (j.contains("policies")) {
    const json& p = j.at("policies");
    if (!p.is_array() || p.empty()) {
      throw ConfigError("policies must be a nonempty array");
    }
    for (const auto& entry : p) {
      config.policies.push_back(parse_policy(entry, config));
    }
  } else {
    json def = json::array({"csgp_ucb"});
    for (const auto& entry : def) {
      config.policies.push_back(parse_policy(entry, config));
    }
  }

  if (j.contains("output")) {
    const json& o = j.at("output");
    reject_unknown_keys(o, {"trace", "summary"}, "output.");
    config.trace_filename = get_or(o, "trace", config.trace_filename);
    config.summary_filename = get_or(o, "summary", config.summary_filename);
  }

  config.validate();
  return config;
}

ExperimentConfig load_config(const std::string& path,
                             const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  json j;
  try {
    j = json::parse(in, nullptr, /*allow_exceptions=*/true,
                    /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  for (const auto& spec : overrides) {
    apply_override(j, spec);
  }
  return parse_config(j);
}

void apply_override(nlohmann::json& j, const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("override must look like key.path=value: " + spec);
  }
  const std::string path = spec.substr(0, eq);
  const std::string raw = spec.substr(eq + 1);

  json value;
  try {
    value = json::parse(raw);
  } catch (const json::parse_error&) {
    value = raw;  // unquoted strings pass through verbatim
  }

  json* node = &j;
  std::size_t start = 0;
  while (true) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(
        start, dot == std::string::npos ? std::string::npos : dot - start);
    if (key.empty()) throw ConfigError("bad override path: " + path);
    if (dot == std::string::npos) {
      (*node)[key] = value;
      break;
    }
    node = &(*node)[key];
    start = dot + 1;
  }
}

nlohmann::json config_to_json(const ExperimentConfig& config) {
  json j;
  j["experiment"] = {
      {"T", config.T},
      {"n_init", config.n_init},
      {"grid_size", config.grid_size},
      {"replications", config.replications},
      {"base_seed", config.base_seed},
      {"delta", config.delta},
      {"refit_cadence", config.refit_cadence},
      {"refit_budget", config.refit_budget},
      {"conditioning_window", config.conditioning_window},
      {"record_wall_ms", config.record_wall_ms},
      {"dump_diagnostics", config.dump_diagnostics},
      {"jobs", config.jobs},
  };
  j["env"] = {
      {"type",
       config.env.type == EnvConfig::Type::kWarfarin ? "warfarin"
                                                     : "synthetic"},
      {"d", config.env.d},
      {"theta", config.env.theta},
      {"S", config.env.S},
      {"noise_var", config.env.noise_var},
      {"seed", config.env.seed},
      {"fine_grid_size", config.env.fine_grid_size},
      {"optimum_grid_size", config.env.optimum_grid_size},
      {"action_lengthscale", config.env.action_lengthscale},
  };
  j["kernel"] = {
      {"family", kernel_family_name(config.kernel.family)},
      {"lengthscale", config.kernel.lengthscale},
      {"variance", config.kernel.variance},
      {"matern_nu", config.kernel.matern_nu},
      {"tied", config.tied},
  };
  j["basis"] = {
      {"num_interior_knots", config.num_interior_knots},
      {"order_k", config.order_k},
  };
  j["sampler"] = {
      {"draws", config.sampler.draws},
      {"burn_in", config.sampler.burn_in},
  };
  j["schedule"] = {
      {"variant", config.alpha_variant == AlphaSchedule::Variant::kDiscrete
                      ? "discrete"
                      : "continuous"},
      {"eta", config.eta},
      {"zeta", config.zeta},
  };
  j["policies"] = json::array();
  for (const auto& arm : config.policies) {
    json p = {{"name", arm.name},
              {"draws", arm.config.sampler.draws},
              {"burn_in", arm.config.sampler.burn_in}};
    if (arm.config.alpha_override) {
      p["alpha_override"] = *arm.config.alpha_override;
    }
    j["policies"].push_back(p);
  }
  j["output"] = {
      {"trace", config.trace_filename},
      {"summary", config.summary_filename},
  };
  return j;
}

}  // namespace csgp
