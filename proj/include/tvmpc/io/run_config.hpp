#pragma once

#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tvmpc/envs/pendulum.hpp"
#include "tvmpc/envs/point_env.hpp"
#include "tvmpc/mpc/rollout.hpp"
#include "tvmpc/train/value_iteration.hpp"

namespace tvmpc {

/// Everything a bench run needs: environment parameters, the training schedule and
/// the closed-loop evaluation settings.
struct RunConfig {
  std::string env;
  ViConfig vi;
  MpcConfig mpc;
  RolloutConfig rollout;
  /// Closed-loop rollouts per evaluation.
  int eval_rollouts = 100;
  envs::PendulumEnv::Params pendulum;
  envs::PointEnv::Params point;
  envs::ConditionedPointTasks::Params conditioned;

  void validate() const;
};

/// "lqr1d", "pendulum", "point", "point_free", "point_cond".
const std::vector<std::string>& env_names();

/// Defaults for one environment. Throws ConfigError for unknown names.
RunConfig preset(const std::string& env);

/// Overrides fields from a JSON document with sections "env", "vi", "fit", "solver"
/// and "mpc". Unknown sections or keys and ill-typed values throw ConfigError.
void apply_json(RunConfig& config, const nlohmann::json& doc);
/// Reads a JSON config file and applies it; parse failures throw ConfigError.
void apply_config_file(RunConfig& config, const std::string& path);

/// Full resolved configuration in the same schema accepted by `apply_json`.
nlohmann::json to_json(const RunConfig& config);

/// Task distribution described by the config.
std::shared_ptr<const TaskDistribution> make_tasks(const RunConfig& config);

}  // namespace tvmpc
