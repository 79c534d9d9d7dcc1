#pragma once

#include <memory>
#include <span>
#include <string>

#include "tvmpc/net/mlp.hpp"
#include "tvmpc/solver/terminal_cost.hpp"

namespace tvmpc {

/// Residual-form value function V(x) = s/2 |r(x, context)|^2, r an `Mlp` with d
/// outputs and s > 0 a fixed output scale. Nonnegative by construction; the
/// Gauss-Newton Hessian s J'J is PSD.
class ValueNetwork {
 public:
  ValueNetwork() = default;
  ValueNetwork(Mlp residual, int state_dim, double output_scale = 1.0);

  /// tanh MLP with `hidden` widths and `residual_dim` outputs on (state, context).
  static ValueNetwork random(int state_dim, int context_dim, const std::vector<int>& hidden, int residual_dim,
                             InputNormalization normalization, Rng& rng, double output_scale = 1.0);

  int state_dim() const { return state_dim_; }
  int context_dim() const { return residual_.input_dim() - state_dim_; }
  int residual_dim() const { return residual_.output_dim(); }
  double output_scale() const { return output_scale_; }

  const Mlp& residual() const { return residual_; }
  Mlp& residual() { return residual_; }

  /// Concatenates state and context into a network input.
  Vec input(const StateVec& x, const Vec& context) const;

  double value(const StateVec& x, const Vec& context = Vec()) const;
  /// Returns V and fills grad = s J'r and gn_hessian = s J'J, with J = dr/dx.
  double value_derivatives(const StateVec& x, const Vec& context, Vec& gradient, Mat& gn_hessian) const;

 private:
  Mlp residual_;
  int state_dim_ = 0;
  double output_scale_ = 1.0;
};

/// Weights of the fitting loss
///   sum_j (V(x_j) - y_j)^2 + alpha * sum_s V(x_s)^2 + l2 / 2 * |theta|^2
struct LossWeights {
  double alpha = 1.0;
  double l2 = 0.0;
};

struct LossResult {
  double loss = 0.0;
  double data_loss = 0.0;
  double stationary_loss = 0.0;
  Vec gradient;
};

/// Inputs are network inputs (state followed by context), one column per sample.
LossResult loss_and_param_gradient(const ValueNetwork& net, const Mat& inputs, std::span<const double> targets,
                                   const Mat& stationary_inputs, const LossWeights& weights);

/// `ValueNetwork` bound to a fixed context, usable as an OCP terminal cost.
class NetworkTerminal final : public TerminalCost {
 public:
  NetworkTerminal(std::shared_ptr<const ValueNetwork> net, Vec context);

  double value(const StateVec& x) const override { return net_->value(x, context_); }
  double derivatives(const StateVec& x, Vec& gradient, Mat& hessian) const override {
    return net_->value_derivatives(x, context_, gradient, hessian);
  }

 private:
  std::shared_ptr<const ValueNetwork> net_;
  Vec context_;
};

}  // namespace tvmpc
