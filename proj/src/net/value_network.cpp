#include "tvmpc/net/value_network.hpp"

#include <cmath>

#include "tvmpc/core/errors.hpp"

namespace tvmpc {

ValueNetwork::ValueNetwork(Mlp residual, int state_dim, double output_scale)
    : residual_(std::move(residual)), state_dim_(state_dim), output_scale_(output_scale) {
  require(state_dim_ >= 1 && state_dim_ <= residual_.input_dim(), "value network: bad state dimension");
  require(output_scale_ > 0.0 && std::isfinite(output_scale_), "value network: output scale must be positive");
}

ValueNetwork ValueNetwork::random(int state_dim, int context_dim, const std::vector<int>& hidden, int residual_dim,
                                  InputNormalization normalization, Rng& rng, double output_scale) {
  std::vector<int> dims{state_dim + context_dim};
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  dims.push_back(residual_dim);
  return ValueNetwork(Mlp::random(std::move(dims), std::move(normalization), rng), state_dim, output_scale);
}

Vec ValueNetwork::input(const StateVec& x, const Vec& context) const {
  require(x.size() == state_dim_, "value network: state dimension mismatch");
  require(context.size() == context_dim(), "value network: context dimension mismatch");
  Vec in(residual_.input_dim());
  in << x, context;
  return in;
}

double ValueNetwork::value(const StateVec& x, const Vec& context) const {
  return 0.5 * output_scale_ * residual_.forward(input(x, context)).squaredNorm();
}

double ValueNetwork::value_derivatives(const StateVec& x, const Vec& context, Vec& gradient, Mat& gn_hessian) const {
  Mat J;
  const Vec r = residual_.forward_jacobian(input(x, context), state_dim_, J);
  gradient.noalias() = output_scale_ * (J.transpose() * r);
  gn_hessian.noalias() = output_scale_ * (J.transpose() * J);
  return 0.5 * output_scale_ * r.squaredNorm();
}

LossResult loss_and_param_gradient(const ValueNetwork& net, const Mat& inputs, std::span<const double> targets,
                                   const Mat& stationary_inputs, const LossWeights& weights) {
  require(inputs.cols() == static_cast<Eigen::Index>(targets.size()), "loss: inputs and targets differ in count");
  require(weights.alpha >= 0.0 && weights.l2 >= 0.0, "loss: weights must be nonnegative");
  const Mlp& mlp = net.residual();
  LossResult out;
  out.gradient = Vec::Zero(mlp.num_params());

  // d/dr of (V - y)^2 with V = s |r|^2 / 2 is 2 s (V - y) r.
  const double s = net.output_scale();
  if (inputs.cols() > 0) {
    Mlp::Tape tape;
    const Mat r = mlp.forward_batch(inputs, &tape);
    const Eigen::ArrayXd v = 0.5 * s * r.colwise().squaredNorm().transpose().array();
    const Eigen::ArrayXd err = v - Eigen::Map<const Eigen::ArrayXd>(targets.data(), targets.size());
    out.data_loss = err.square().sum();
    mlp.backward(tape, r * (2.0 * s * err).matrix().asDiagonal(), out.gradient);
  }
  if (stationary_inputs.cols() > 0 && weights.alpha > 0.0) {
    Mlp::Tape tape;
    const Mat r = mlp.forward_batch(stationary_inputs, &tape);
    const Eigen::ArrayXd v = 0.5 * s * r.colwise().squaredNorm().transpose().array();
    out.stationary_loss = weights.alpha * v.square().sum();
    mlp.backward(tape, r * (2.0 * s * weights.alpha * v).matrix().asDiagonal(), out.gradient);
  }
  out.loss = out.data_loss + out.stationary_loss;
  if (weights.l2 > 0.0) {
    out.loss += 0.5 * weights.l2 * mlp.params().squaredNorm();
    out.gradient += weights.l2 * mlp.params();
  }
  if (!std::isfinite(out.loss)) throw NumericalError("loss: non-finite value");
  return out;
}

NetworkTerminal::NetworkTerminal(std::shared_ptr<const ValueNetwork> net, Vec context)
    : net_(std::move(net)), context_(std::move(context)) {
  require(net_ != nullptr, "terminal: null network");
  require(context_.size() == net_->context_dim(), "terminal: context dimension mismatch");
}

}  // namespace tvmpc
