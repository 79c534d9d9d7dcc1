#include "tvmpc/mpc/rollout.hpp"

#include <algorithm>

#include "tvmpc/core/errors.hpp"
#include "tvmpc/core/trajectory.hpp"
#include "tvmpc/train/parallel.hpp"

namespace tvmpc {

double constraint_violation(const EnvModel& env, const StateVec& x, const ControlVec& u) {
  double v = 0.0;
  if (env.nc() > 0) v = std::max(v, -env.constraint(x, u).minCoeff());
  if (!env.omega_is_trivial()) v = std::max(v, -env.omega_constraint(x).minCoeff());
  return v;
}

MpcTrace mpc_rollout(const EnvModel& env, const StateVec& x0, Controller& controller, const RolloutConfig& config) {
  require(config.steps >= 0, "mpc_rollout: steps must be nonnegative");
  require(x0.size() == env.nx(), "mpc_rollout: x0 dimension mismatch");
  MpcTrace trace;
  controller.reset();
  trace.states.push_back(x0);
  if (!env.omega_is_trivial() && env.omega_constraint(x0).minCoeff() < 0.0) {
    trace.infeasible_start = true;
    trace.error = "initial state lies outside the feasible set";
    return trace;
  }
  StateVec x = x0;
  for (int k = 0; k < config.steps; ++k) {
    const ControlStep cs = controller.control(x);
    if (cs.infeasible) {
      trace.error = "step " + std::to_string(k) + ": " + cs.message;
      if (k == 0) trace.infeasible_start = true;
      break;
    }
    const double cost = env.stage_cost(x, cs.u);
    const double violation = constraint_violation(env, x, cs.u);
    trace.controls.push_back(cs.u);
    trace.running_costs.push_back(cost);
    trace.violations.push_back(violation);
    trace.iterations.push_back(cs.iterations);
    trace.solve_seconds.push_back(cs.solve_seconds);
    trace.degraded.push_back(cs.degraded);
    trace.cumulative_cost += cost;
    trace.max_violation = std::max(trace.max_violation, violation);
    trace.degraded_steps += cs.degraded ? 1 : 0;
    if (trace.first_reach_step < 0 && cost < config.reach_threshold) trace.first_reach_step = k;
    x = step(env, x, cs.u);
    trace.states.push_back(x);
    if (!x.allFinite()) {
      trace.error = "state became non-finite at step " + std::to_string(k + 1);
      break;
    }
  }
  if (!env.omega_is_trivial() && trace.states.size() > 1) {
    trace.max_violation = std::max(trace.max_violation, std::max(0.0, -env.omega_constraint(x).minCoeff()));
  }
  trace.reached = trace.error.empty() && !trace.running_costs.empty() &&
                  trace.running_costs.back() < config.reach_threshold;
  return trace;
}

RolloutSummary summarize(const std::vector<MpcTrace>& traces) {
  RolloutSummary s;
  s.rollouts = traces.size();
  if (traces.empty()) return s;
  std::size_t reached = 0, steps = 0;
  double seconds = 0.0;
  for (const auto& t : traces) {
    s.mean_cost += t.cumulative_cost;
    reached += t.reached ? 1 : 0;
    s.max_violation = std::max(s.max_violation, t.max_violation);
    s.degraded_steps += t.degraded_steps;
    s.infeasible_starts += t.infeasible_start ? 1 : 0;
    for (double v : t.solve_seconds) seconds += v;
    steps += t.solve_seconds.size();
  }
  s.mean_cost /= static_cast<double>(traces.size());
  s.reach_rate = static_cast<double>(reached) / static_cast<double>(traces.size());
  s.mean_solve_seconds = steps ? seconds / static_cast<double>(steps) : 0.0;
  return s;
}

std::vector<MpcTrace> batch_rollouts(const std::vector<Task>& tasks, const ControllerFactory& make_controller,
                                     const RolloutConfig& config, int workers) {
  std::vector<MpcTrace> traces(tasks.size());
  parallel_for(tasks.size(), resolve_workers(workers), [&](std::size_t i, int) {
    const auto controller = make_controller(tasks[i]);
    traces[i] = mpc_rollout(*tasks[i].model, tasks[i].x, *controller, config);
  });
  return traces;
}

}  // namespace tvmpc
