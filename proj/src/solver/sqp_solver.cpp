#include "tvmpc/solver/sqp_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tvmpc/core/errors.hpp"

namespace tvmpc {

std::string to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Converged: return "converged";
    case SolveStatus::MaxIterations: return "max_iterations";
    case SolveStatus::LineSearchFailed: return "line_search_failed";
    case SolveStatus::InfeasibleStart: return "infeasible_start";
    case SolveStatus::NumericalFailure: return "numerical_failure";
  }
  return "unknown";
}

void SolverConfig::validate() const {
  require(max_sqp_iterations >= 1, "solver: max_sqp_iterations must be >= 1");
  require(max_qp_iterations >= 1, "solver: max_qp_iterations must be >= 1");
  require(kkt_tolerance > 0.0 && qp_tolerance > 0.0 && violation_tolerance > 0.0 && dynamics_tolerance > 0.0,
          "solver: tolerances must be positive");
  require(line_search_factor > 0.0 && line_search_factor < 1.0, "solver: line_search_factor must be in (0, 1)");
  require(max_backtracks >= 0, "solver: max_backtracks must be >= 0");
}

Trajectory shift_trajectory(const Trajectory& traj) {
  Trajectory out;
  if (traj.controls.empty()) return traj;
  out.states.assign(traj.states.begin() + 1, traj.states.end());
  out.states.push_back(traj.states.back());
  out.controls.assign(traj.controls.begin() + 1, traj.controls.end());
  out.controls.push_back(traj.controls.back());
  out.stage_costs.assign(out.controls.size(), 0.0);
  return out;
}

SqpSolver::Evaluation SqpSolver::evaluate(const OcpProblem& problem, const std::vector<StateVec>& xs,
                                          const std::vector<ControlVec>& us) const {
  const EnvModel& env = *problem.env;
  const int T = problem.horizon;
  Evaluation ev;
  ev.stage_costs.resize(T);
  for (int k = 0; k < T; ++k) {
    ev.stage_costs[k] = env.stage_cost(xs[k], us[k]);
    ev.cost += ev.stage_costs[k];
    const Vec defect = env.dynamics(xs[k], us[k]) - xs[k + 1];
    ev.defect_l1 += defect.lpNorm<1>();
    ev.defect_inf = std::max(ev.defect_inf, defect.lpNorm<Eigen::Infinity>());
    if (env.nc() > 0) {
      const Vec c = env.constraint(xs[k], us[k]);
      for (int i : active_rows_[k]) {
        const double v = std::max(0.0, -c[i]);
        ev.violation_l1 += v;
        ev.violation_max = std::max(ev.violation_max, v);
      }
    }
  }
  if (problem.terminal) ev.cost += problem.terminal->value(xs[T]);
  if (problem.uses_terminal_set()) {
    const Vec c = env.omega_constraint(xs[T]);
    for (Eigen::Index i = 0; i < c.size(); ++i) {
      const double v = std::max(0.0, -c[i]);
      ev.violation_l1 += v;
      ev.violation_max = std::max(ev.violation_max, v);
    }
  }
  if (!std::isfinite(ev.cost)) throw NumericalError("sqp: non-finite cost");
  return ev;
}

void SqpSolver::build_qp(const OcpProblem& problem, const std::vector<StateVec>& xs,
                         const std::vector<ControlVec>& us) {
  const EnvModel& env = *problem.env;
  const int T = problem.horizon;
  qp_.nx = env.nx();
  qp_.nu = env.nu();
  qp_.stages.resize(T);
  for (int k = 0; k < T; ++k) {
    StageDerivatives d = linearize(env, xs[k], us[k]);
    QpStage& s = qp_.stages[k];
    s.A = std::move(d.A);
    s.B = std::move(d.B);
    s.d = env.dynamics(xs[k], us[k]) - xs[k + 1];
    s.Q = std::move(d.cost.lxx);
    s.R = std::move(d.cost.luu);
    s.S = std::move(d.cost.lux);
    s.q = std::move(d.cost.lx);
    s.r = std::move(d.cost.lu);
    const auto& rows = active_rows_[k];
    const auto m = static_cast<Eigen::Index>(rows.size());
    s.G.resize(m, env.nx());
    s.H.resize(m, env.nu());
    s.e.resize(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      s.G.row(i) = d.cx.row(rows[i]);
      s.H.row(i) = d.cu.row(rows[i]);
      s.e[i] = d.c[rows[i]];
    }
  }
  if (problem.terminal) {
    problem.terminal->derivatives(xs[T], terminal_grad_, qp_.QT);
    if (!terminal_grad_.allFinite() || !qp_.QT.allFinite()) throw NumericalError("sqp: non-finite terminal derivative");
  } else {
    terminal_grad_ = Vec::Zero(env.nx());
    qp_.QT = Mat::Zero(env.nx(), env.nx());
  }
  qp_.qT = terminal_grad_;
  if (problem.uses_terminal_set()) {
    qp_.GT = env.omega_jacobian(xs[T]);
    qp_.eT = env.omega_constraint(xs[T]);
  } else {
    qp_.GT.resize(0, env.nx());
    qp_.eT.resize(0);
  }
}

double SqpSolver::kkt_residual(const std::vector<Vec>& lambda) const {
  const int T = qp_.horizon();
  double worst = 0.0;
  auto complementarity = [&](const Vec& lam, const Vec& e) {
    for (Eigen::Index i = 0; i < e.size(); ++i) {
      worst = std::max({worst, std::abs(lam[i] * e[i]), -e[i], -lam[i]});
    }
  };
  Vec nu = qp_.qT;
  if (qp_.GT.rows() > 0) {
    nu.noalias() -= qp_.GT.transpose() * lambda[T];
    complementarity(lambda[T], qp_.eT);
  }
  for (int k = T - 1; k >= 0; --k) {
    const QpStage& s = qp_.stages[k];
    Vec ru = s.r;
    ru.noalias() += s.B.transpose() * nu;
    if (s.H.rows() > 0) {
      ru.noalias() -= s.H.transpose() * lambda[k];
      complementarity(lambda[k], s.e);
    }
    worst = std::max({worst, ru.lpNorm<Eigen::Infinity>(), s.d.lpNorm<Eigen::Infinity>()});
    Vec next = s.q;
    next.noalias() += s.A.transpose() * nu;
    if (s.G.rows() > 0) next.noalias() -= s.G.transpose() * lambda[k];
    nu = std::move(next);
  }
  return worst;
}

SolveResult SqpSolver::solve(const OcpProblem& problem, const SolverConfig& config, const Trajectory* warm_start) {
  config.validate();
  require(problem.env != nullptr, "sqp: problem has no environment");
  require(problem.horizon >= 1, "sqp: horizon must be >= 1");
  const EnvModel& env = *problem.env;
  require(problem.x0.size() == env.nx(), "sqp: x0 dimension mismatch");
  const int T = problem.horizon;

  SolveResult result;
  std::vector<StateVec> xs;
  std::vector<ControlVec> us;
  if (warm_start && warm_start->horizon() == T && warm_start->states.size() == static_cast<std::size_t>(T + 1)) {
    xs = warm_start->states;
    us = warm_start->controls;
    xs[0] = problem.x0;
  } else {
    const std::vector<ControlVec> zeros(T, ControlVec::Zero(env.nu()));
    Trajectory cold = rollout(env, problem.x0, zeros);
    xs = std::move(cold.states);
    us = std::move(cold.controls);
  }

  auto finish = [&](const Evaluation& ev) {
    result.trajectory.states = xs;
    result.trajectory.controls = us;
    result.trajectory.stage_costs = ev.stage_costs;
    result.trajectory.dynamics_defect = ev.defect_inf;
    result.optimal_cost = ev.cost;
    result.max_constraint_violation = ev.violation_max;
    return result;
  };

  // Rows of c(x_0, u_0) that do not depend on u_0 are fixed by x_0 and left out of the QP.
  active_rows_.assign(T, {});
  Vec x0_rows;
  if (env.nc() > 0) {
    Mat cx, cu;
    env.constraint_jacobians(xs[0], us[0], cx, cu);
    const Vec c0 = env.constraint(xs[0], us[0]);
    for (int i = 0; i < env.nc(); ++i) {
      if (cu.row(i).lpNorm<Eigen::Infinity>() > 0.0) {
        active_rows_[0].push_back(i);
      } else if (c0[i] < -config.violation_tolerance) {
        result.status = SolveStatus::InfeasibleStart;
        result.message = "x0 violates a state constraint (c = " + std::to_string(c0[i]) + ")";
      }
    }
    for (int k = 1; k < T; ++k) {
      active_rows_[k].resize(env.nc());
      for (int i = 0; i < env.nc(); ++i) active_rows_[k][i] = i;
    }
  }
  if (problem.uses_terminal_set()) {
    const Vec omega = env.omega_constraint(problem.x0);
    if (omega.size() > 0 && omega.minCoeff() < -config.violation_tolerance) {
      result.status = SolveStatus::InfeasibleStart;
      result.message = "x0 lies outside the feasible set (c_omega = " + std::to_string(omega.minCoeff()) + ")";
    }
  }

  Evaluation ev;
  try {
    ev = evaluate(problem, xs, us);
  } catch (const NumericalError& e) {
    result.status = SolveStatus::NumericalFailure;
    result.message = e.what();
    return result;
  }
  if (result.status == SolveStatus::InfeasibleStart) return finish(ev);

  std::vector<Vec> lambda;
  double penalty = 0.0;
  result.merit_history.push_back(ev.cost);
  QpSettings qp_settings{config.max_qp_iterations, config.qp_tolerance, 1e-10};

  try {
    for (int it = 0;; ++it) {
      build_qp(problem, xs, us);
      if (it > 0) {
        result.kkt_residual = kkt_residual(lambda);
        if (result.kkt_residual <= config.kkt_tolerance && ev.violation_max <= config.violation_tolerance &&
            ev.defect_inf <= config.dynamics_tolerance) {
          result.converged = true;
          result.status = SolveStatus::Converged;
          break;
        }
      }
      if (it >= config.max_sqp_iterations) {
        result.status = SolveStatus::MaxIterations;
        break;
      }

      const QpSolution step = qp_solver_.solve(qp_, qp_settings);
      result.qp_iterations += step.iterations;
      ++result.iterations;

      double multiplier_norm = 0.0;
      for (const auto& l : step.lambda) {
        if (l.size() > 0) multiplier_norm = std::max(multiplier_norm, l.lpNorm<Eigen::Infinity>());
      }
      for (std::size_t k = 1; k < step.costate.size(); ++k) {
        multiplier_norm = std::max(multiplier_norm, step.costate[k].lpNorm<Eigen::Infinity>());
      }
      penalty = std::max(penalty, 1.1 * multiplier_norm + 1e-8);

      double slope = terminal_grad_.dot(step.dx[T]);
      for (int k = 0; k < T; ++k) slope += qp_.stages[k].q.dot(step.dx[k]) + qp_.stages[k].r.dot(step.du[k]);
      slope -= penalty * (ev.defect_l1 + ev.violation_l1);
      slope = std::min(slope, 0.0);

      const double merit = ev.cost + penalty * (ev.defect_l1 + ev.violation_l1);
      const double noise = 1e-12 * std::max(1.0, std::abs(merit));
      double alpha = 1.0;
      bool accepted = false;
      std::vector<StateVec> xs_try(T + 1);
      std::vector<ControlVec> us_try(T);
      Evaluation ev_try;
      for (int b = 0; b <= config.max_backtracks; ++b) {
        for (int k = 0; k <= T; ++k) xs_try[k] = xs[k] + alpha * step.dx[k];
        for (int k = 0; k < T; ++k) us_try[k] = us[k] + alpha * step.du[k];
        ev_try = evaluate(problem, xs_try, us_try);
        const double merit_try = ev_try.cost + penalty * (ev_try.defect_l1 + ev_try.violation_l1);
        if (merit_try <= merit + config.armijo * alpha * slope + noise) {
          accepted = true;
          result.merit_history.push_back(merit_try);
          break;
        }
        alpha *= config.line_search_factor;
      }
      if (!accepted) {
        // The QP step is negligible: its multipliers certify the current iterate.
        result.kkt_residual = kkt_residual(step.lambda);
        if (result.kkt_residual <= config.kkt_tolerance && ev.violation_max <= config.violation_tolerance &&
            ev.defect_inf <= config.dynamics_tolerance) {
          result.converged = true;
          result.status = SolveStatus::Converged;
          break;
        }
        result.status = SolveStatus::LineSearchFailed;
        result.message = "no sufficient merit decrease after " + std::to_string(config.max_backtracks) + " backtracks";
        break;
      }
      xs.swap(xs_try);
      us.swap(us_try);
      ev = std::move(ev_try);
      lambda = step.lambda;
    }
  } catch (const NumericalError& e) {
    result.status = SolveStatus::NumericalFailure;
    result.message = e.what();
    result.converged = false;
  }
  return finish(ev);
}

}  // namespace tvmpc
