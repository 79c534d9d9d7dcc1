#include "tvmpc/mpc/controller.hpp"

#include <chrono>

#include "tvmpc/core/errors.hpp"

namespace tvmpc {

MpcController::MpcController(std::shared_ptr<const EnvModel> env, std::shared_ptr<const TerminalCost> terminal,
                             MpcConfig config)
    : env_(std::move(env)), terminal_(std::move(terminal)), config_(config) {
  require(env_ != nullptr, "mpc: null environment");
  require(config_.horizon >= 1, "mpc: horizon must be at least 1");
  config_.solver.validate();
}

ControlStep MpcController::control(const StateVec& x) {
  const OcpProblem problem{env_, config_.horizon, terminal_, std::nullopt, x};
  const auto start = std::chrono::steady_clock::now();
  last_ = solver_.solve(problem, config_.solver, warm_ ? &*warm_ : nullptr);
  ControlStep out;
  out.solve_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  out.iterations = last_.iterations;
  out.status = last_.status;
  out.message = last_.message;
  if (last_.status == SolveStatus::InfeasibleStart) {
    out.infeasible = true;
    out.u = ControlVec::Zero(env_->nu());
    warm_.reset();
    return out;
  }
  out.degraded = !last_.converged;
  out.u = last_.trajectory.controls.front();
  if (!out.u.allFinite()) {
    out.u = ControlVec::Zero(env_->nu());
    out.degraded = true;
    warm_.reset();
  } else {
    warm_ = shift_trajectory(last_.trajectory);
  }
  return out;
}

PolicyController::PolicyController(std::shared_ptr<const PolicyNetwork> policy, Vec context)
    : policy_(std::move(policy)), context_(std::move(context)) {
  require(policy_ != nullptr, "policy controller: null policy");
  require(context_.size() == policy_->context_dim(), "policy controller: context dimension mismatch");
}

ControlStep PolicyController::control(const StateVec& x) {
  const auto start = std::chrono::steady_clock::now();
  ControlStep out;
  out.u = policy_->control(x, context_);
  out.solve_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

}  // namespace tvmpc
