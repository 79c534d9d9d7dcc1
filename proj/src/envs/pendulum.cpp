#include "tvmpc/envs/pendulum.hpp"

#include <cmath>
#include <numbers>

#include "tvmpc/core/errors.hpp"

namespace tvmpc::envs {

namespace {
constexpr double kVelocityWeight = 0.01;
constexpr double kControlWeight = 0.001;
}  // namespace

double wrap_angle(double theta) {
  constexpr double pi = std::numbers::pi;
  if (theta >= -pi && theta <= pi) return theta;
  double wrapped = std::remainder(theta, 2.0 * pi);
  return wrapped;
}

PendulumEnv::PendulumEnv(Params params) : params_(params) {
  if (!(params_.dt > 0.0) || !(params_.u_max > 0.0) || !(params_.velocity_box > 0.0)) {
    throw ConfigError("pendulum: dt, u_max and velocity_box must be positive");
  }
}

StateVec PendulumEnv::dynamics(const StateVec& x, const ControlVec& u) const {
  StateVec next(2);
  next[0] = x[0] + params_.dt * x[1];
  next[1] = x[1] + params_.dt * (-params_.g_over_l * std::sin(x[0]) + u[0]);
  return next;
}

double PendulumEnv::stage_cost(const StateVec& x, const ControlVec& u) const {
  return std::cos(x[0]) + 1.0 + kVelocityWeight * x[1] * x[1] + kControlWeight * u[0] * u[0];
}

Vec PendulumEnv::constraint(const StateVec&, const ControlVec& u) const {
  Vec c(2);
  c << params_.u_max - u[0], u[0] + params_.u_max;
  return c;
}

void PendulumEnv::dynamics_jacobians(const StateVec& x, const ControlVec&, Mat& A, Mat& B) const {
  A.resize(2, 2);
  A << 1.0, params_.dt, -params_.dt * params_.g_over_l * std::cos(x[0]), 1.0;
  B.resize(2, 1);
  B << 0.0, params_.dt;
}

void PendulumEnv::cost_derivatives(const StateVec& x, const ControlVec& u, CostDerivatives& out) const {
  const double half_sin = std::sin(0.5 * x[0]);
  out.lx.resize(2);
  out.lx << -std::sin(x[0]), 2.0 * kVelocityWeight * x[1];
  out.lu = Vec::Constant(1, 2.0 * kControlWeight * u[0]);
  out.lxx = Mat::Zero(2, 2);
  out.lxx(0, 0) = half_sin * half_sin;
  out.lxx(1, 1) = 2.0 * kVelocityWeight;
  out.luu = Mat::Constant(1, 1, 2.0 * kControlWeight);
  out.lux = Mat::Zero(1, 2);
}

void PendulumEnv::constraint_jacobians(const StateVec&, const ControlVec&, Mat& cx, Mat& cu) const {
  cx = Mat::Zero(2, 2);
  cu.resize(2, 1);
  cu << -1.0, 1.0;
}

StateVec PendulumEnv::sample_state(Rng& rng) const {
  StateVec x(2);
  x[0] = uniform(rng, -std::numbers::pi, std::numbers::pi);
  x[1] = uniform(rng, -params_.velocity_box, params_.velocity_box);
  return x;
}

StationaryPoint PendulumEnv::sample_stationary(Rng&) const {
  StateVec x(2);
  x << std::numbers::pi, 0.0;
  return {x, Vec::Zero(1)};
}

InputNormalization PendulumEnv::state_normalization() const {
  InputNormalization n;
  n.offset = Vec::Zero(2);
  n.offset[0] = std::numbers::pi;
  n.scale.resize(2);
  n.scale << std::numbers::pi, params_.velocity_box;
  n.periodic = {true, false};
  return n;
}

}  // namespace tvmpc::envs
