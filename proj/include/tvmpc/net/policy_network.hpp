#pragma once

#include "tvmpc/net/mlp.hpp"

namespace tvmpc {

/// Direct state(+context) -> control regressor, evaluated as the horizon-0 controller.
class PolicyNetwork {
 public:
  PolicyNetwork() = default;
  PolicyNetwork(Mlp mlp, int state_dim);

  static PolicyNetwork random(int state_dim, int context_dim, const std::vector<int>& hidden, int control_dim,
                              InputNormalization normalization, Rng& rng);

  int state_dim() const { return state_dim_; }
  int context_dim() const { return mlp_.input_dim() - state_dim_; }
  int control_dim() const { return mlp_.output_dim(); }
  const Mlp& mlp() const { return mlp_; }
  Mlp& mlp() { return mlp_; }

  ControlVec control(const StateVec& x, const Vec& context = Vec()) const;

 private:
  Mlp mlp_;
  int state_dim_ = 0;
};

}  // namespace tvmpc
