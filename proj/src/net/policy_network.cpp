#include "tvmpc/net/policy_network.hpp"

#include "tvmpc/core/errors.hpp"

namespace tvmpc {

PolicyNetwork::PolicyNetwork(Mlp mlp, int state_dim) : mlp_(std::move(mlp)), state_dim_(state_dim) {
  require(state_dim_ >= 1 && state_dim_ <= mlp_.input_dim(), "policy network: bad state dimension");
}

PolicyNetwork PolicyNetwork::random(int state_dim, int context_dim, const std::vector<int>& hidden, int control_dim,
                                    InputNormalization normalization, Rng& rng) {
  std::vector<int> dims{state_dim + context_dim};
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  dims.push_back(control_dim);
  return PolicyNetwork(Mlp::random(std::move(dims), std::move(normalization), rng), state_dim);
}

ControlVec PolicyNetwork::control(const StateVec& x, const Vec& context) const {
  require(x.size() == state_dim_ && context.size() == context_dim(), "policy network: input dimension mismatch");
  Vec in(mlp_.input_dim());
  in << x, context;
  return mlp_.forward(in);
}

}  // namespace tvmpc
