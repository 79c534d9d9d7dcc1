#include "tvmpc/envs/lqr1d.hpp"

#include <cmath>

namespace tvmpc::envs {

Vec Lqr1dEnv::constraint(const StateVec&, const ControlVec& u) const {
  if (!params_.u_min) return Vec(0);
  return Vec::Constant(1, u[0] - *params_.u_min);
}

void Lqr1dEnv::dynamics_jacobians(const StateVec&, const ControlVec&, Mat& A, Mat& B) const {
  A = Mat::Identity(1, 1);
  B = Mat::Identity(1, 1);
}

void Lqr1dEnv::cost_derivatives(const StateVec& x, const ControlVec& u, CostDerivatives& out) const {
  out.lx = 2.0 * x;
  out.lu = 2.0 * u;
  out.lxx = Mat::Constant(1, 1, 2.0);
  out.luu = Mat::Constant(1, 1, 2.0);
  out.lux = Mat::Zero(1, 1);
}

void Lqr1dEnv::constraint_jacobians(const StateVec&, const ControlVec&, Mat& cx, Mat& cu) const {
  if (!params_.u_min) {
    cx.resize(0, 1);
    cu.resize(0, 1);
    return;
  }
  cx = Mat::Zero(1, 1);
  cu = Mat::Ones(1, 1);
}

StateVec Lqr1dEnv::sample_state(Rng& rng) const {
  return Vec::Constant(1, uniform(rng, -params_.sample_box, params_.sample_box));
}

StationaryPoint Lqr1dEnv::sample_stationary(Rng&) const { return {Vec::Zero(1), Vec::Zero(1)}; }

double lqr1d_riccati_fixed_point(int max_iterations, double tol) {
  double p = 0.0;
  for (int k = 0; k < max_iterations; ++k) {
    const double next = 1.0 + p / (1.0 + p);
    if (std::abs(next - p) < tol) return next;
    p = next;
  }
  return p;
}

}  // namespace tvmpc::envs
