#pragma once

#include <memory>
#include <optional>
#include <string>

#include "tvmpc/net/policy_network.hpp"
#include "tvmpc/solver/sqp_solver.hpp"

namespace tvmpc {

struct ControlStep {
  ControlVec u;
  /// The solver hit its iteration cap or failed; `u` is the first control of the best iterate.
  bool degraded = false;
  /// The state lies outside the feasible set; `u` is zero and must not be trusted.
  bool infeasible = false;
  int iterations = 0;
  double solve_seconds = 0.0;
  SolveStatus status = SolveStatus::Converged;
  std::string message;
};

/// State feedback evaluated once per closed-loop step.
class Controller {
 public:
  virtual ~Controller() = default;
  virtual ControlStep control(const StateVec& x) = 0;
  /// Forgets warm-start state before a new rollout.
  virtual void reset() {}
};

struct MpcConfig {
  int horizon = 10;
  SolverConfig solver = SolverConfig::online();
};

/// Receding-horizon controller: solves the horizon-T problem with an optional terminal
/// cost from the measured state, warm-started from the shifted previous solution,
/// and applies the first control.
class MpcController final : public Controller {
 public:
  MpcController(std::shared_ptr<const EnvModel> env, std::shared_ptr<const TerminalCost> terminal, MpcConfig config);

  ControlStep control(const StateVec& x) override;
  void reset() override { warm_.reset(); }

  /// Full solver output of the most recent step.
  const SolveResult& last_solve() const { return last_; }
  const MpcConfig& config() const { return config_; }

 private:
  std::shared_ptr<const EnvModel> env_;
  std::shared_ptr<const TerminalCost> terminal_;
  MpcConfig config_;
  SqpSolver solver_;
  std::optional<Trajectory> warm_;
  SolveResult last_;
};

/// Horizon-0 controller: evaluates a policy network.
class PolicyController final : public Controller {
 public:
  PolicyController(std::shared_ptr<const PolicyNetwork> policy, Vec context);
  ControlStep control(const StateVec& x) override;

 private:
  std::shared_ptr<const PolicyNetwork> policy_;
  Vec context_;
};

}  // namespace tvmpc
