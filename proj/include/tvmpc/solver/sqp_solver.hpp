#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tvmpc/core/trajectory.hpp"
#include "tvmpc/solver/stagewise_qp.hpp"
#include "tvmpc/solver/terminal_cost.hpp"

namespace tvmpc {

/// Finite-horizon problem
///
///   min  sum_k l(x_k, u_k) + V(x_T)
///   s.t. x_0 = x0, x_{k+1} = f(x_k, u_k), c(x_k, u_k) >= 0, x_T in Omega
struct OcpProblem {
  std::shared_ptr<const EnvModel> env;
  int horizon = 1;
  /// Null means V = 0.
  std::shared_ptr<const TerminalCost> terminal;
  /// Unset: impose x_T in Omega whenever the environment declares a nontrivial Omega.
  std::optional<bool> terminal_set;
  StateVec x0;

  bool uses_terminal_set() const { return terminal_set.value_or(!env->omega_is_trivial()); }
};

struct SolverConfig {
  int max_sqp_iterations = 20;
  double kkt_tolerance = 1e-4;
  int max_qp_iterations = 200;
  double qp_tolerance = 1e-8;
  double violation_tolerance = 1e-6;
  double dynamics_tolerance = 1e-8;
  double line_search_factor = 0.5;
  int max_backtracks = 10;
  double armijo = 1e-4;

  /// Settings used when generating training targets.
  static SolverConfig offline() { return {}; }
  /// Real-time settings for closed-loop control.
  static SolverConfig online() {
    SolverConfig c;
    c.max_sqp_iterations = 6;
    c.violation_tolerance = 1e-3;
    return c;
  }
  void validate() const;
};

enum class SolveStatus { Converged, MaxIterations, LineSearchFailed, InfeasibleStart, NumericalFailure };

std::string to_string(SolveStatus status);

struct SolveResult {
  Trajectory trajectory;
  /// sum_k l(x_k, u_k) + V(x_T) at the returned iterate.
  double optimal_cost = 0.0;
  double kkt_residual = 0.0;
  int iterations = 0;
  int qp_iterations = 0;
  double max_constraint_violation = 0.0;
  bool converged = false;
  SolveStatus status = SolveStatus::MaxIterations;
  /// l1 merit at each accepted iterate (starting point first).
  std::vector<double> merit_history;
  std::string message;
};

/// Multiple-shooting SQP with Gauss-Newton Hessians, a stagewise interior-point QP and
/// a backtracking line search on an l1 merit function. One instance owns its
/// workspace; use one solver per thread.
class SqpSolver {
 public:
  SolveResult solve(const OcpProblem& problem, const SolverConfig& config,
                    const Trajectory* warm_start = nullptr);

 private:
  struct Evaluation {
    double cost = 0.0;
    double defect_l1 = 0.0;
    double defect_inf = 0.0;
    double violation_l1 = 0.0;
    double violation_max = 0.0;
    std::vector<double> stage_costs;
  };

  Evaluation evaluate(const OcpProblem& problem, const std::vector<StateVec>& xs,
                      const std::vector<ControlVec>& us) const;
  void build_qp(const OcpProblem& problem, const std::vector<StateVec>& xs, const std::vector<ControlVec>& us);
  double kkt_residual(const std::vector<Vec>& lambda) const;

  StagewiseQp qp_;
  StagewiseQpSolver qp_solver_;
  std::vector<std::vector<int>> active_rows_;  // rows of c(x_k, u_k) kept in the QP
  Vec terminal_grad_;
};

/// Shifts a solution by one stage for warm starting: drops (x_0, u_0) and repeats the last entries.
Trajectory shift_trajectory(const Trajectory& traj);

}  // namespace tvmpc
