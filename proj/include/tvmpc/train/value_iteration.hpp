#pragma once

#include <functional>
#include <string>
#include <vector>

#include "tvmpc/train/fit.hpp"
#include "tvmpc/train/targets.hpp"

namespace tvmpc {

/// Extra data collected around each Bellman solve.
enum class Augmentation {
  None,
  /// Also solve from the terminal state of every solution.
  LastState,
  /// Roll the OCP out as an MPC controller from every sample.
  Rollout,
};

std::string to_string(Augmentation mode);
/// Accepts "none", "last_state" and "rollout"; throws ConfigError otherwise.
Augmentation parse_augmentation(const std::string& name);

struct ViConfig {
  int iterations = 100;
  int samples = 500;
  /// Stationary anchors per iteration for single-task environments. Conditioned
  /// environments anchor the stationary point of each sampled task instead.
  int stationary_samples = 1;
  int horizon = 10;
  double alpha = 1.0;
  FitConfig fit;
  Augmentation augmentation = Augmentation::None;
  int rollout_max_steps = 60;
  double reach_threshold = 0.1;
  std::vector<int> hidden{64, 64};
  int residual_dim = 64;
  SolverConfig solver = SolverConfig::offline();
  double max_drop_fraction = 0.2;
  int checkpoint_every = 50;
  int workers = 1;
  std::uint64_t seed = 0;

  void validate() const;
};

struct IterationMetrics {
  int iteration = 0;
  std::size_t dataset_size = 0;
  std::size_t attempted = 0;
  std::size_t dropped = 0;
  /// Mean |V_k(x) - target| with the network that produced the targets.
  double bellman_residual = 0.0;
  double fit_loss = 0.0;
  /// Largest value at the anchors after the fit.
  double anchor_value = 0.0;
  double mean_sqp_iterations = 0.0;
  double seconds = 0.0;
};

struct ViHooks {
  std::function<void(const IterationMetrics&, const ValueNetwork&)> on_iteration;
  /// Called every `checkpoint_every` iterations and after the last one.
  std::function<void(int iteration, const ValueNetwork&)> on_checkpoint;
};

struct ViResult {
  ValueNetwork net;
  std::vector<IterationMetrics> metrics;
};

/// Initial value network for a task distribution (random weights from `seed`).
ValueNetwork initial_value_network(const TaskDistribution& tasks, const ViConfig& config);

/// Fitted value iteration. Iteration 1 solves without terminal cost (V_1 = 0); each
/// later iteration uses a frozen copy of the previous fit as terminal cost.
ViResult value_iteration(const TaskDistribution& tasks, const ViConfig& config, const ViHooks& hooks = {});

}  // namespace tvmpc
