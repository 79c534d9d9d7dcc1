#include "tvmpc/train/targets.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include "tvmpc/train/parallel.hpp"

namespace tvmpc {
namespace {

std::vector<SolveResult> solve_all(const std::vector<Task>& tasks, const std::shared_ptr<const ValueNetwork>& net,
                                   int horizon, const TargetOptions& options) {
  std::vector<SolveResult> results(tasks.size());
  const int workers = resolve_workers(options.workers);
  std::vector<SqpSolver> solvers(static_cast<std::size_t>(workers));
  parallel_for(tasks.size(), workers, [&](std::size_t i, int w) {
    OcpProblem problem{tasks[i].model, horizon, terminal_for(net, tasks[i]), std::nullopt, tasks[i].x};
    results[i] = solvers[static_cast<std::size_t>(w)].solve(problem, options.solver);
  });
  return results;
}

std::string describe_failures(const std::vector<Task>& tasks, const std::vector<SolveResult>& results) {
  std::map<std::string, int> by_status;
  std::ostringstream first;
  for (std::size_t i = 0; i < results.size(); ++i) {
    if (results[i].converged) continue;
    if (by_status.empty()) {
      first << "first failure at x = [" << tasks[i].x.transpose() << "]: " << results[i].message;
    }
    ++by_status[to_string(results[i].status)];
  }
  std::ostringstream os;
  for (const auto& [status, count] : by_status) os << status << '=' << count << ' ';
  os << first.str();
  return os.str();
}

void check_drops(const SolveStats& stats, double limit, const std::string& details) {
  if (stats.drop_fraction() > limit) {
    std::ostringstream os;
    os << "training aborted: " << stats.dropped << " of " << stats.attempted
       << " OCP solves did not converge (limit " << limit * 100.0 << "%): " << details;
    throw TrainingAborted(os.str());
  }
}

}  // namespace

SolveStats& SolveStats::operator+=(const SolveStats& other) {
  attempted += other.attempted;
  dropped += other.dropped;
  sqp_iterations += other.sqp_iterations;
  return *this;
}

Vec task_input(const Task& task) {
  const Vec ctx = task.model->context();
  Vec in(task.x.size() + ctx.size());
  in << task.x, ctx;
  return in;
}

std::shared_ptr<const TerminalCost> terminal_for(const std::shared_ptr<const ValueNetwork>& net, const Task& task) {
  if (!net) return nullptr;
  return std::make_shared<NetworkTerminal>(net, task.model->context());
}

TargetBatch bellman_targets(const std::vector<Task>& tasks, const std::shared_ptr<const ValueNetwork>& net,
                            int horizon, const TargetOptions& options) {
  require(horizon >= 1, "bellman_targets: horizon must be at least 1");
  const int input_dim = tasks.empty() ? (net ? net->residual().input_dim() : 0)
                                      : static_cast<int>(task_input(tasks.front()).size());
  const std::vector<SolveResult> results = solve_all(tasks, net, horizon, options);

  TargetBatch out;
  out.data = Dataset(input_dim);
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const SolveResult& r = results[i];
    ++out.stats.attempted;
    out.stats.sqp_iterations += r.iterations;
    if (!r.converged || !std::isfinite(r.optimal_cost)) {
      ++out.stats.dropped;
      continue;
    }
    out.data.add(task_input(tasks[i]), std::max(0.0, r.optimal_cost));
    out.source.push_back(i);
    out.solutions.push_back(r.trajectory);
  }
  check_drops(out.stats, options.max_drop_fraction, out.stats.dropped ? describe_failures(tasks, results) : "");
  return out;
}

TargetBatch collect_rollout_data(const std::vector<Task>& starts, const std::shared_ptr<const ValueNetwork>& net,
                                 int horizon, const TargetOptions& options, const RolloutOptions& rollout) {
  require(horizon >= 1 && rollout.max_steps >= 1, "collect_rollout_data: horizon and step cap must be positive");
  struct Record {
    Task task;
    SolveResult result;
  };
  struct RolloutResult {
    std::vector<Record> records;
    SolveStats stats;
  };
  std::vector<RolloutResult> per_start(starts.size());
  const int workers = resolve_workers(options.workers);
  std::vector<SqpSolver> solvers(static_cast<std::size_t>(workers));

  parallel_for(starts.size(), workers, [&](std::size_t i, int w) {
    SqpSolver& solver = solvers[static_cast<std::size_t>(w)];
    RolloutResult& out = per_start[i];
    const auto terminal = terminal_for(net, starts[i]);
    Task task = starts[i];
    Trajectory warm;
    for (int step = 0; step < rollout.max_steps; ++step) {
      OcpProblem problem{task.model, horizon, terminal, std::nullopt, task.x};
      SolveResult r = solver.solve(problem, options.solver, step > 0 ? &warm : nullptr);
      ++out.stats.attempted;
      out.stats.sqp_iterations += r.iterations;
      if (!r.converged || !std::isfinite(r.optimal_cost)) {
        ++out.stats.dropped;
        break;
      }
      const bool reached = r.trajectory.stage_costs.front() < rollout.reach_threshold;
      const StateVec next = r.trajectory.states[1];
      warm = shift_trajectory(r.trajectory);
      out.records.push_back({task, std::move(r)});
      if (reached) break;
      task.x = next;
    }
  });

  TargetBatch batch;
  batch.data = Dataset(starts.empty() ? 0 : static_cast<int>(task_input(starts.front()).size()));
  for (std::size_t i = 0; i < starts.size(); ++i) {
    batch.stats += per_start[i].stats;
    for (auto& rec : per_start[i].records) {
      batch.data.add(task_input(rec.task), std::max(0.0, rec.result.optimal_cost));
      batch.source.push_back(i);
      batch.solutions.push_back(std::move(rec.result.trajectory));
    }
  }
  check_drops(batch.stats, options.max_drop_fraction, "rollout solves failed");
  return batch;
}

TargetBatch ground_truth_value(const std::vector<Task>& tasks, const TargetOptions& options, int horizon) {
  TargetOptions relaxed = options;
  relaxed.max_drop_fraction = 1.0;
  return bellman_targets(tasks, nullptr, horizon, relaxed);
}

GroundTruthData ground_truth_trajectories(const std::vector<Task>& tasks, const TargetOptions& options, int prefix,
                                          int horizon) {
  require(prefix >= 1 && prefix <= horizon, "ground_truth_trajectories: prefix must lie in [1, horizon]");
  const TargetBatch batch = ground_truth_value(tasks, options, horizon);
  GroundTruthData out;
  const auto input_dim = static_cast<int>(batch.data.inputs.rows());
  const int control_dim = tasks.empty() ? 0 : tasks.front().model->nu();
  out.values = Dataset(input_dim);
  out.policy = PolicyDataset(input_dim, control_dim);
  out.stats = batch.stats;
  for (std::size_t j = 0; j < batch.solutions.size(); ++j) {
    const Trajectory& traj = batch.solutions[j];
    Task task = tasks[batch.source[j]];
    double to_go = traj.cumulative_cost();
    for (int k = 0; k < prefix; ++k) {
      task.x = traj.states[static_cast<std::size_t>(k)];
      const Vec in = task_input(task);
      out.values.add(in, std::max(0.0, to_go));
      out.policy.add(in, traj.controls[static_cast<std::size_t>(k)]);
      to_go -= traj.stage_costs[static_cast<std::size_t>(k)];
    }
  }
  return out;
}

}  // namespace tvmpc
