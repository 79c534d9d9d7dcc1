#pragma once

#include <memory>

#include "tvmpc/core/env_model.hpp"
#include "tvmpc/envs/rounded_rect.hpp"

namespace tvmpc::envs {

/// Planar single integrator x' = x + dt u that has to reach `target` around an
/// optional rounded-rectangle obstacle.
///
///   l(x, u) = |x - target|^2 + 0.1 |u|^2,   c(x) = sd(x, obstacle) >= 0
///
/// The system is fully actuated with a pure state constraint, so Omega = {c(x) >= 0}
/// and it is imposed on the terminal state.
class PointEnv final : public EnvModel {
 public:
  struct Params {
    double dt = 0.02;
    double control_weight = 0.1;
    Eigen::Vector2d target{0.6, 0.0};
    bool has_obstacle = true;
    RoundedRect obstacle{};
    Eigen::Vector2d box_lo{-1.0, -1.0};
    Eigen::Vector2d box_hi{1.0, 1.0};
    int max_rejections = 10000;
  };

  PointEnv() = default;
  /// `context` is appended to value-network inputs; plain point envs leave it empty.
  explicit PointEnv(Params params, Vec context = Vec(0));

  std::string name() const override { return params_.has_obstacle ? "point" : "point_free"; }
  int nx() const override { return 2; }
  int nu() const override { return 2; }
  int nc() const override { return params_.has_obstacle ? 1 : 0; }
  int n_omega() const override { return params_.has_obstacle ? 1 : 0; }
  double dt() const override { return params_.dt; }

  StateVec dynamics(const StateVec& x, const ControlVec& u) const override { return x + params_.dt * u; }
  double stage_cost(const StateVec& x, const ControlVec& u) const override;
  Vec constraint(const StateVec& x, const ControlVec& u) const override;
  Vec omega_constraint(const StateVec& x) const override;

  void dynamics_jacobians(const StateVec& x, const ControlVec& u, Mat& A, Mat& B) const override;
  void cost_derivatives(const StateVec& x, const ControlVec& u, CostDerivatives& out) const override;
  void constraint_jacobians(const StateVec& x, const ControlVec& u, Mat& cx, Mat& cu) const override;
  Mat omega_jacobian(const StateVec& x) const override;

  /// Uniform in the box, rejecting states inside the obstacle. Throws ConfigError
  /// after `max_rejections` consecutive rejections.
  StateVec sample_state(Rng& rng) const override;
  StationaryPoint sample_stationary(Rng& rng) const override;
  Vec context() const override { return context_; }

  const Params& params() const { return params_; }
  double signed_distance(const StateVec& x) const;

 private:
  Params params_;
  Vec context_;
};

/// Point environment whose target and obstacle center are redrawn per task and
/// passed to the value network as context (target_x, target_y, obstacle_x, obstacle_y).
class ConditionedPointTasks final : public TaskDistribution {
 public:
  struct Params {
    PointEnv::Params base{};
    Eigen::Vector2d target_lo{-0.8, -0.8};
    Eigen::Vector2d target_hi{0.8, 0.8};
    Eigen::Vector2d obstacle_lo{-0.15, -0.15};
    Eigen::Vector2d obstacle_hi{0.15, 0.15};
    /// Minimum clearance between a sampled target and the obstacle.
    double target_clearance = 0.02;
  };

  ConditionedPointTasks() = default;
  explicit ConditionedPointTasks(Params params) : params_(std::move(params)) {}

  std::string name() const override { return "point_cond"; }
  int state_dim() const override { return 2; }
  int control_dim() const override { return 2; }
  int context_dim() const override { return 4; }

  Task sample_task(Rng& rng) const override;
  StationaryTask sample_stationary_task(Rng& rng) const override;
  InputNormalization input_normalization() const override { return InputNormalization::identity(6); }
  double value_scale() const override { return 1.0 / params_.base.dt; }

  /// Builds the model for one (target, obstacle center) pair.
  std::shared_ptr<const PointEnv> make_instance(const Eigen::Vector2d& target,
                                                const Eigen::Vector2d& obstacle_center) const;
  /// Draws a target/obstacle pair with the target outside the obstacle.
  std::shared_ptr<const PointEnv> sample_instance(Rng& rng) const;

  const Params& params() const { return params_; }

 private:
  Params params_;
};

}  // namespace tvmpc::envs
