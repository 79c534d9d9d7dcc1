#pragma once

#include <span>
#include <vector>

#include "tvmpc/core/env_model.hpp"

namespace tvmpc {

/// States x_0..x_T, controls u_0..u_{T-1} and the stage costs l(x_k, u_k).
struct Trajectory {
  std::vector<StateVec> states;
  std::vector<ControlVec> controls;
  std::vector<double> stage_costs;
  /// max_k ||x_{k+1} - f(x_k, u_k)||_inf
  double dynamics_defect = 0.0;

  int horizon() const { return static_cast<int>(controls.size()); }
  double cumulative_cost() const;
  bool consistent() const;
};

/// Stage linearization consumed by the SQP.
struct StageDerivatives {
  Mat A, B;
  CostDerivatives cost;
  Vec c;
  Mat cx, cu;
};

/// Returns f(x, u). Throws ContractViolation on dimension mismatch.
StateVec step(const EnvModel& model, const StateVec& x, const ControlVec& u);

/// Chains `step` from x0; stage costs are l(x_k, u_k).
Trajectory rollout(const EnvModel& model, const StateVec& x0, std::span<const ControlVec> controls);

/// Dynamics Jacobians, stage-cost gradient / Gauss-Newton Hessian and constraint Jacobians
/// at (x, u). Throws NumericalError if any entry is non-finite.
StageDerivatives linearize(const EnvModel& model, const StateVec& x, const ControlVec& u);

/// Recomputes stage costs and the dynamics defect of an existing trajectory.
void evaluate_trajectory(const EnvModel& model, Trajectory& traj);

namespace fd {

/// Central-difference Jacobian of g at z with step h.
template <typename Fn>
Mat jacobian(Fn&& g, const Vec& z, double h = 1e-6) {
  const Vec g0 = g(z);
  Mat J(g0.size(), z.size());
  Vec zp = z, zm = z;
  for (Eigen::Index j = 0; j < z.size(); ++j) {
    zp[j] = z[j] + h;
    zm[j] = z[j] - h;
    J.col(j) = (g(zp) - g(zm)) / (2.0 * h);
    zp[j] = z[j];
    zm[j] = z[j];
  }
  return J;
}

template <typename Fn>
Vec gradient(Fn&& g, const Vec& z, double h = 1e-6) {
  Vec out(z.size());
  Vec zp = z, zm = z;
  for (Eigen::Index j = 0; j < z.size(); ++j) {
    zp[j] = z[j] + h;
    zm[j] = z[j] - h;
    out[j] = (g(zp) - g(zm)) / (2.0 * h);
    zp[j] = z[j];
    zm[j] = z[j];
  }
  return out;
}

}  // namespace fd
}  // namespace tvmpc
