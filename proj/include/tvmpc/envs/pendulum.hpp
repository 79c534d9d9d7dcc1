#pragma once

#include "tvmpc/core/env_model.hpp"

namespace tvmpc::envs {

/// Torque-limited simple pendulum, state (theta, theta_dot), theta = 0 hanging down.
///
///   theta_ddot = -(g/L) sin(theta) + u,   explicit Euler with step dt
///   l(x, u)   = cos(theta) + 1 + 0.01 theta_dot^2 + 0.001 u^2
///
/// The cost is written as 1/2 |r|^2 with r = (2 cos(theta/2), sqrt(0.02) theta_dot,
/// sqrt(0.002) u), which gives a PSD Gauss-Newton Hessian.
class PendulumEnv final : public EnvModel {
 public:
  struct Params {
    double g_over_l = 9.81;
    double dt = 0.05;
    double u_max = 2.0;
    double velocity_box = 6.0;
  };

  PendulumEnv() = default;
  explicit PendulumEnv(Params params);

  std::string name() const override { return "pendulum"; }
  int nx() const override { return 2; }
  int nu() const override { return 1; }
  int nc() const override { return 2; }
  double dt() const override { return params_.dt; }

  StateVec dynamics(const StateVec& x, const ControlVec& u) const override;
  double stage_cost(const StateVec& x, const ControlVec& u) const override;
  Vec constraint(const StateVec& x, const ControlVec& u) const override;

  void dynamics_jacobians(const StateVec& x, const ControlVec& u, Mat& A, Mat& B) const override;
  void cost_derivatives(const StateVec& x, const ControlVec& u, CostDerivatives& out) const override;
  void constraint_jacobians(const StateVec& x, const ControlVec& u, Mat& cx, Mat& cu) const override;

  StateVec sample_state(Rng& rng) const override;
  StationaryPoint sample_stationary(Rng& rng) const override;
  InputNormalization state_normalization() const override;

  const Params& params() const { return params_; }

 private:
  Params params_;
};

/// Wraps an angle to [-pi, pi].
double wrap_angle(double theta);

}  // namespace tvmpc::envs
