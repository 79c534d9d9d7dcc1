#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "tvmpc/mpc/controller.hpp"

namespace tvmpc {

/// Closed-loop record. Per-step vectors have one entry per applied control;
/// `states` also holds the final state.
struct MpcTrace {
  std::vector<StateVec> states;
  std::vector<ControlVec> controls;
  std::vector<double> running_costs;
  std::vector<double> violations;
  std::vector<int> iterations;
  std::vector<double> solve_seconds;
  std::vector<bool> degraded;

  /// Final running cost below the threshold.
  bool reached = false;
  /// First step whose running cost fell below the threshold, -1 if never.
  int first_reach_step = -1;
  double cumulative_cost = 0.0;
  double max_violation = 0.0;
  int degraded_steps = 0;
  bool infeasible_start = false;
  std::string error;

  int steps() const { return static_cast<int>(controls.size()); }
};

struct RolloutConfig {
  int steps = 300;
  double reach_threshold = 0.1;
};

/// Constraint violation of a state-control pair: max(0, -c(x, u), -c_omega(x)).
double constraint_violation(const EnvModel& env, const StateVec& x, const ControlVec& u);

/// Simulates `steps` closed-loop steps with the environment dynamics. An infeasible
/// start produces an empty trace with `infeasible_start` set.
MpcTrace mpc_rollout(const EnvModel& env, const StateVec& x0, Controller& controller, const RolloutConfig& config);

struct RolloutSummary {
  std::size_t rollouts = 0;
  double mean_cost = 0.0;
  double reach_rate = 0.0;
  double max_violation = 0.0;
  double mean_solve_seconds = 0.0;
  long degraded_steps = 0;
  std::size_t infeasible_starts = 0;
};

RolloutSummary summarize(const std::vector<MpcTrace>& traces);

using ControllerFactory = std::function<std::unique_ptr<Controller>(const Task& task)>;

/// Runs one rollout per task concurrently; traces are ordered like `tasks`.
std::vector<MpcTrace> batch_rollouts(const std::vector<Task>& tasks, const ControllerFactory& make_controller,
                                     const RolloutConfig& config, int workers);

}  // namespace tvmpc
