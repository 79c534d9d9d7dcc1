#pragma once

#include <functional>
#include <string>
#include <vector>

#include "tvmpc/mpc/rollout.hpp"
#include "tvmpc/train/value_iteration.hpp"

namespace tvmpc {

/// Mean squared error of the network over a value dataset.
double value_mse(const ValueNetwork& net, const Dataset& data);

/// Held-out states with long-horizon ground-truth values.
struct HeldOutSet {
  std::vector<Task> tasks;
  Dataset values;
};
HeldOutSet make_held_out(const TaskDistribution& tasks, int count, std::uint64_t seed, const TargetOptions& options,
                         int horizon = 200);

struct TrainStudyPoint {
  int horizon = 0;
  int iteration = 0;
  double mse = 0.0;
  double bellman_residual = 0.0;
};

/// Runs value iteration once per training horizon with an otherwise identical
/// schedule and records the held-out error after every iteration.
std::vector<TrainStudyPoint> train_horizon_study(const TaskDistribution& tasks, const ViConfig& base,
                                                 const std::vector<int>& horizons, const Dataset& held_out,
                                                 const std::function<void(const TrainStudyPoint&)>& on_point = {});

/// Supervised value network and distilled policy regressed on ground-truth trajectories.
struct Baselines {
  ValueNetwork supervised;
  PolicyNetwork policy;
  SolveStats stats;
};

struct BaselineConfig {
  int starts = 300;
  /// States kept from the start of every ground-truth trajectory.
  int prefix = 20;
  int horizon = 200;
  FitConfig value_fit;
  FitConfig policy_fit;
  std::vector<int> policy_hidden{64, 64};
};

Baselines train_baselines(const TaskDistribution& tasks, const ViConfig& shape, const BaselineConfig& config,
                          const TargetOptions& options);

struct TestStudyConfig {
  std::vector<int> horizons{1, 5, 10};
  int rollouts = 100;
  int steps = 150;
  /// Horizon of the reference controller.
  int reference_horizon = 200;
  SolverConfig solver = SolverConfig::online();
  double reach_threshold = 0.1;
  int workers = 1;
  std::uint64_t seed = 0;
};

struct TestStudyRow {
  /// "vi", "supervised" or "policy".
  std::string model;
  /// 0 for the policy.
  int horizon = 0;
  double mean_cost = 0.0;
  /// Mean closed-loop cost minus the reference cost from the same starts.
  double mean_gap = 0.0;
  double reach_rate = 0.0;
  double max_violation = 0.0;
};

/// Closed-loop cost of each controller relative to the reference controller over
/// common random starts. The reference cost of a start is the first `steps` stage
/// costs of its horizon `reference_horizon + steps` optimal trajectory, which is what
/// a receding horizon controller with a saturated horizon applies.
std::vector<TestStudyRow> test_horizon_study(const TaskDistribution& tasks, const ValueNetwork& vi_net,
                                             const ValueNetwork& supervised, const PolicyNetwork& policy,
                                             const TestStudyConfig& config);

}  // namespace tvmpc
