#pragma once

#include <optional>

#include "tvmpc/core/env_model.hpp"

namespace tvmpc::envs {

/// Scalar oracle system x' = x + u with l = x^2 + u^2. Its infinite-horizon value is
/// P x^2 with P = (1 + sqrt 5) / 2, so every approximate quantity has a closed form.
class Lqr1dEnv final : public EnvModel {
 public:
  struct Params {
    double sample_box = 1.0;
    /// Optional lower bound on u (adds the path constraint u - u_min >= 0).
    std::optional<double> u_min;
  };

  Lqr1dEnv() = default;
  explicit Lqr1dEnv(Params params) : params_(params) {}

  std::string name() const override { return "lqr1d"; }
  int nx() const override { return 1; }
  int nu() const override { return 1; }
  int nc() const override { return params_.u_min ? 1 : 0; }
  double dt() const override { return 1.0; }

  StateVec dynamics(const StateVec& x, const ControlVec& u) const override { return x + u; }
  double stage_cost(const StateVec& x, const ControlVec& u) const override {
    return x.squaredNorm() + u.squaredNorm();
  }
  Vec constraint(const StateVec& x, const ControlVec& u) const override;

  void dynamics_jacobians(const StateVec& x, const ControlVec& u, Mat& A, Mat& B) const override;
  void cost_derivatives(const StateVec& x, const ControlVec& u, CostDerivatives& out) const override;
  void constraint_jacobians(const StateVec& x, const ControlVec& u, Mat& cx, Mat& cu) const override;

  StateVec sample_state(Rng& rng) const override;
  StationaryPoint sample_stationary(Rng& rng) const override;

  const Params& params() const { return params_; }

 private:
  Params params_;
};

/// Fixed point of P <- 1 + P / (1 + P), iterated from P = 0.
double lqr1d_riccati_fixed_point(int max_iterations = 200, double tol = 1e-15);

}  // namespace tvmpc::envs
