#include "tvmpc/envs/point_env.hpp"

#include "tvmpc/core/errors.hpp"

namespace tvmpc::envs {

PointEnv::PointEnv(Params params, Vec context) : params_(std::move(params)), context_(std::move(context)) {
  if (!(params_.dt > 0.0)) throw ConfigError("point: dt must be positive");
  if (!(params_.control_weight > 0.0)) throw ConfigError("point: control_weight must be positive");
  if ((params_.box_hi - params_.box_lo).minCoeff() <= 0.0) throw ConfigError("point: empty sampling box");
  if (params_.obstacle.corner_radius < 0.0 || params_.obstacle.half_extents.minCoeff() < 0.0) {
    throw ConfigError("point: obstacle extents must be nonnegative");
  }
}

double PointEnv::signed_distance(const StateVec& x) const {
  return params_.obstacle.signed_distance(Eigen::Vector2d(x[0], x[1]));
}

double PointEnv::stage_cost(const StateVec& x, const ControlVec& u) const {
  return (x - params_.target).squaredNorm() + params_.control_weight * u.squaredNorm();
}

Vec PointEnv::constraint(const StateVec& x, const ControlVec&) const { return omega_constraint(x); }

Vec PointEnv::omega_constraint(const StateVec& x) const {
  if (!params_.has_obstacle) return Vec(0);
  return Vec::Constant(1, signed_distance(x));
}

void PointEnv::dynamics_jacobians(const StateVec&, const ControlVec&, Mat& A, Mat& B) const {
  A = Mat::Identity(2, 2);
  B = params_.dt * Mat::Identity(2, 2);
}

void PointEnv::cost_derivatives(const StateVec& x, const ControlVec& u, CostDerivatives& out) const {
  out.lx = 2.0 * (x - params_.target);
  out.lu = 2.0 * params_.control_weight * u;
  out.lxx = 2.0 * Mat::Identity(2, 2);
  out.luu = 2.0 * params_.control_weight * Mat::Identity(2, 2);
  out.lux = Mat::Zero(2, 2);
}

void PointEnv::constraint_jacobians(const StateVec& x, const ControlVec&, Mat& cx, Mat& cu) const {
  cx = omega_jacobian(x);
  cu = Mat::Zero(nc(), 2);
}

Mat PointEnv::omega_jacobian(const StateVec& x) const {
  if (!params_.has_obstacle) return Mat(0, 2);
  return params_.obstacle.gradient(Eigen::Vector2d(x[0], x[1])).transpose();
}

StateVec PointEnv::sample_state(Rng& rng) const {
  for (int attempt = 0; attempt < params_.max_rejections; ++attempt) {
    StateVec x(2);
    x << uniform(rng, params_.box_lo.x(), params_.box_hi.x()), uniform(rng, params_.box_lo.y(), params_.box_hi.y());
    if (!params_.has_obstacle || signed_distance(x) >= 0.0) return x;
  }
  throw ConfigError("point: rejection sampling exceeded " + std::to_string(params_.max_rejections) +
                    " attempts; the obstacle covers the sampling box");
}

StationaryPoint PointEnv::sample_stationary(Rng&) const { return {params_.target, Vec::Zero(2)}; }

std::shared_ptr<const PointEnv> ConditionedPointTasks::make_instance(const Eigen::Vector2d& target,
                                                                     const Eigen::Vector2d& obstacle_center) const {
  PointEnv::Params p = params_.base;
  p.has_obstacle = true;
  p.target = target;
  p.obstacle.center = obstacle_center;
  Vec context(4);
  context << target, obstacle_center;
  return std::make_shared<const PointEnv>(p, context);
}

std::shared_ptr<const PointEnv> ConditionedPointTasks::sample_instance(Rng& rng) const {
  for (int attempt = 0; attempt < params_.base.max_rejections; ++attempt) {
    const Eigen::Vector2d obstacle(uniform(rng, params_.obstacle_lo.x(), params_.obstacle_hi.x()),
                                   uniform(rng, params_.obstacle_lo.y(), params_.obstacle_hi.y()));
    const Eigen::Vector2d target(uniform(rng, params_.target_lo.x(), params_.target_hi.x()),
                                 uniform(rng, params_.target_lo.y(), params_.target_hi.y()));
    RoundedRect rect = params_.base.obstacle;
    rect.center = obstacle;
    if (rect.signed_distance(target) >= params_.target_clearance) return make_instance(target, obstacle);
  }
  throw ConfigError("point_cond: could not draw a target outside the obstacle");
}

Task ConditionedPointTasks::sample_task(Rng& rng) const {
  auto model = sample_instance(rng);
  StateVec x = model->sample_state(rng);
  return {std::move(model), std::move(x)};
}

StationaryTask ConditionedPointTasks::sample_stationary_task(Rng& rng) const {
  auto model = sample_instance(rng);
  StationaryPoint point = model->sample_stationary(rng);
  return {std::move(model), std::move(point)};
}

}  // namespace tvmpc::envs
