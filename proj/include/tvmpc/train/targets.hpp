#pragma once

#include <memory>
#include <vector>

#include "tvmpc/core/errors.hpp"
#include "tvmpc/net/value_network.hpp"
#include "tvmpc/solver/sqp_solver.hpp"
#include "tvmpc/train/dataset.hpp"

namespace tvmpc {

/// Too many OCP solves failed in one value iteration. `what()` carries the diagnostics.
class TrainingAborted : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

struct SolveStats {
  std::size_t attempted = 0;
  std::size_t dropped = 0;
  long sqp_iterations = 0;

  double drop_fraction() const { return attempted == 0 ? 0.0 : static_cast<double>(dropped) / attempted; }
  double mean_sqp_iterations() const {
    return attempted == 0 ? 0.0 : static_cast<double>(sqp_iterations) / attempted;
  }
  SolveStats& operator+=(const SolveStats& other);
};

/// Records produced by a batch of OCP solves. `source[j]` is the task index of
/// record j and `solutions[j]` the optimal trajectory behind its target.
struct TargetBatch {
  Dataset data;
  std::vector<std::size_t> source;
  std::vector<Trajectory> solutions;
  SolveStats stats;
};

struct TargetOptions {
  SolverConfig solver = SolverConfig::offline();
  int workers = 1;
  /// Abort when more than this fraction of solves fails to converge.
  double max_drop_fraction = 0.2;
};

/// Network input (state followed by the task context).
Vec task_input(const Task& task);

/// Terminal cost for a task: the frozen network bound to the task context, or null for V = 0.
std::shared_ptr<const TerminalCost> terminal_for(const std::shared_ptr<const ValueNetwork>& net, const Task& task);

/// Solves the horizon-T problem from every task state with `net` (null = zero function)
/// as terminal cost. Targets are optimal costs; non-converged solves are dropped and
/// counted. Throws TrainingAborted if the drop fraction exceeds the limit.
TargetBatch bellman_targets(const std::vector<Task>& tasks, const std::shared_ptr<const ValueNetwork>& net,
                            int horizon, const TargetOptions& options);

struct RolloutOptions {
  int max_steps = 60;
  double reach_threshold = 0.1;
};

/// Uses the horizon-T problem as an MPC controller from each start. Every visited
/// state is recorded with its optimal cost until the running cost drops below the
/// threshold or `max_steps` states are recorded. A failed solve ends that rollout
/// and keeps the prefix.
TargetBatch collect_rollout_data(const std::vector<Task>& starts, const std::shared_ptr<const ValueNetwork>& net,
                                 int horizon, const TargetOptions& options, const RolloutOptions& rollout);

/// Long-horizon solves without terminal cost; drops and counts failures but never aborts.
TargetBatch ground_truth_value(const std::vector<Task>& tasks, const TargetOptions& options, int horizon = 200);

/// Ground-truth trajectories: the first `prefix` states of each long-horizon solution
/// with their cost-to-go as value targets and their optimal controls as policy targets.
struct GroundTruthData {
  Dataset values;
  PolicyDataset policy;
  SolveStats stats;
};
GroundTruthData ground_truth_trajectories(const std::vector<Task>& tasks, const TargetOptions& options, int prefix,
                                          int horizon = 200);

}  // namespace tvmpc
