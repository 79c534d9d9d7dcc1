#include "tvmpc/core/trajectory.hpp"

#include <numeric>
#include <string>

#include "tvmpc/core/errors.hpp"

namespace tvmpc {
namespace {

void check_dims(const EnvModel& model, const StateVec& x, const ControlVec& u) {
  if (x.size() != model.nx() || u.size() != model.nu()) {
    throw ContractViolation(model.name() + ": expected (nx=" + std::to_string(model.nx()) +
                            ", nu=" + std::to_string(model.nu()) + "), got (" + std::to_string(x.size()) +
                            ", " + std::to_string(u.size()) + ")");
  }
}

bool all_finite(const Mat& m) { return m.allFinite(); }

}  // namespace

double Trajectory::cumulative_cost() const {
  return std::accumulate(stage_costs.begin(), stage_costs.end(), 0.0);
}

bool Trajectory::consistent() const {
  return states.size() == controls.size() + 1 && stage_costs.size() == controls.size();
}

StateVec step(const EnvModel& model, const StateVec& x, const ControlVec& u) {
  check_dims(model, x, u);
  return model.dynamics(x, u);
}

Trajectory rollout(const EnvModel& model, const StateVec& x0, std::span<const ControlVec> controls) {
  Trajectory traj;
  traj.states.reserve(controls.size() + 1);
  traj.controls.reserve(controls.size());
  traj.stage_costs.reserve(controls.size());
  traj.states.push_back(x0);
  for (const auto& u : controls) {
    const StateVec& x = traj.states.back();
    check_dims(model, x, u);
    traj.stage_costs.push_back(model.stage_cost(x, u));
    traj.controls.push_back(u);
    traj.states.push_back(model.dynamics(x, u));
  }
  if (controls.empty() && x0.size() != model.nx()) throw ContractViolation(model.name() + ": x0 dimension mismatch");
  return traj;
}

StageDerivatives linearize(const EnvModel& model, const StateVec& x, const ControlVec& u) {
  check_dims(model, x, u);
  StageDerivatives d;
  model.dynamics_jacobians(x, u, d.A, d.B);
  model.cost_derivatives(x, u, d.cost);
  d.c = model.constraint(x, u);
  model.constraint_jacobians(x, u, d.cx, d.cu);
  const bool finite = all_finite(d.A) && all_finite(d.B) && all_finite(d.cost.lx) && all_finite(d.cost.lu) &&
                      all_finite(d.cost.lxx) && all_finite(d.cost.luu) && all_finite(d.cost.lux) &&
                      all_finite(d.c) && all_finite(d.cx) && all_finite(d.cu);
  if (!finite) throw NumericalError(model.name() + ": non-finite derivative in linearize");
  return d;
}

void evaluate_trajectory(const EnvModel& model, Trajectory& traj) {
  require(traj.states.size() == traj.controls.size() + 1, "evaluate_trajectory: inconsistent lengths");
  traj.stage_costs.resize(traj.controls.size());
  traj.dynamics_defect = 0.0;
  for (std::size_t k = 0; k < traj.controls.size(); ++k) {
    traj.stage_costs[k] = model.stage_cost(traj.states[k], traj.controls[k]);
    const double defect =
        (model.dynamics(traj.states[k], traj.controls[k]) - traj.states[k + 1]).lpNorm<Eigen::Infinity>();
    traj.dynamics_defect = std::max(traj.dynamics_defect, defect);
  }
}

}  // namespace tvmpc
