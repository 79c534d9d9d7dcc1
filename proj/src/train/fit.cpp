#include "tvmpc/train/fit.hpp"

#include <algorithm>
#include <numeric>

#include "tvmpc/core/errors.hpp"

namespace tvmpc {
namespace {

/// Draws the next `count` indices from a reshuffled-per-pass permutation.
std::vector<std::size_t> next_batch(std::vector<std::size_t>& order, std::size_t& cursor, std::size_t n,
                                    std::size_t count, Rng& rng) {
  if (order.size() != n) {
    order.resize(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    cursor = n;
  }
  std::vector<std::size_t> batch;
  batch.reserve(count);
  while (batch.size() < count) {
    if (cursor >= n) {
      std::shuffle(order.begin(), order.end(), rng);
      cursor = 0;
    }
    batch.push_back(order[cursor++]);
  }
  return batch;
}

void check_finite(const Vec& params, const char* what) {
  if (!params.allFinite()) throw NumericalError(std::string(what) + ": parameters became non-finite");
}

}  // namespace

int FitConfig::steps_for(std::size_t dataset_size) const {
  if (epochs <= 0) return sgd_steps;
  const auto per_epoch = (dataset_size + static_cast<std::size_t>(batch_size) - 1) / static_cast<std::size_t>(batch_size);
  return epochs * static_cast<int>(std::max<std::size_t>(per_epoch, 1));
}

void FitConfig::validate() const {
  if (batch_size < 1) throw ConfigError("fit: batch_size must be at least 1");
  if (sgd_steps < 0 || epochs < 0) throw ConfigError("fit: sgd_steps and epochs must be nonnegative");
  if (!(adam.learning_rate > 0.0)) throw ConfigError("fit: learning_rate must be positive");
  if (adam.weight_decay < 0.0) throw ConfigError("fit: weight_decay must be nonnegative");
  if (!(adam.beta1 >= 0.0 && adam.beta1 < 1.0 && adam.beta2 >= 0.0 && adam.beta2 < 1.0)) {
    throw ConfigError("fit: betas must lie in [0, 1)");
  }
  if (!(adam.epsilon > 0.0)) throw ConfigError("fit: epsilon must be positive");
}

ValueFitter::ValueFitter(Eigen::Index num_params, FitConfig config, std::uint64_t seed)
    : config_(config), adam_(num_params, config.adam), rng_(make_rng(seed, 0x66697400)) {
  config_.validate();
}

FitStats ValueFitter::fit(ValueNetwork& net, const Dataset& data, const Mat& global_anchors, double alpha) {
  require(alpha >= 0.0, "fit: alpha must be nonnegative");
  FitStats stats;
  if (data.empty()) return stats;
  data.validate();
  const std::size_t n = data.size();
  const std::size_t batch_size = std::min<std::size_t>(static_cast<std::size_t>(config_.batch_size), n);
  const int steps = config_.steps_for(n);
  const int tail = std::max(1, config_.epochs > 0 ? steps / config_.epochs : steps / 10);
  LossWeights weights{alpha, 0.0};
  const Eigen::Index dim = data.inputs.rows();

  Mat inputs(dim, static_cast<Eigen::Index>(batch_size));
  std::vector<double> targets(batch_size);
  std::vector<int> anchor_ids;
  double total = 0.0, tail_total = 0.0;
  for (int s = 0; s < steps; ++s) {
    const auto batch = next_batch(order_, cursor_, n, batch_size, rng_);
    anchor_ids.clear();
    for (std::size_t b = 0; b < batch_size; ++b) {
      inputs.col(static_cast<Eigen::Index>(b)) = data.inputs.col(static_cast<Eigen::Index>(batch[b]));
      targets[b] = data.targets[batch[b]];
      if (data.anchor[batch[b]] >= 0) anchor_ids.push_back(data.anchor[batch[b]]);
    }
    std::sort(anchor_ids.begin(), anchor_ids.end());
    anchor_ids.erase(std::unique(anchor_ids.begin(), anchor_ids.end()), anchor_ids.end());
    Mat anchors(dim, global_anchors.cols() + static_cast<Eigen::Index>(anchor_ids.size()));
    anchors.leftCols(global_anchors.cols()) = global_anchors;
    for (std::size_t a = 0; a < anchor_ids.size(); ++a) {
      anchors.col(global_anchors.cols() + static_cast<Eigen::Index>(a)) = data.anchors.col(anchor_ids[a]);
    }

    // alpha weighs the mean anchor penalty against the mean data error; the loss
    // itself sums both terms.
    if (anchors.cols() > 0) {
      weights.alpha = alpha * static_cast<double>(batch_size) / static_cast<double>(anchors.cols());
    }
    const LossResult res = loss_and_param_gradient(net, inputs, targets, anchors, weights);
    adam_.step(net.residual().params(), res.gradient);
    const double per_record = res.loss / static_cast<double>(batch_size);
    total += per_record;
    if (s >= steps - tail) tail_total += per_record;
  }
  check_finite(net.residual().params(), "fit");
  stats.steps = steps;
  stats.mean_loss = steps > 0 ? total / steps : 0.0;
  stats.final_loss = steps > 0 ? tail_total / std::min(tail, steps) : 0.0;
  return stats;
}

ValueNetwork train_supervised_value(const Dataset& data, ValueNetwork net, const FitConfig& config, double alpha,
                                    const Mat& global_anchors, std::uint64_t seed) {
  ValueFitter fitter(net.residual().num_params(), config, seed);
  fitter.fit(net, data, global_anchors, alpha);
  return net;
}

PolicyNetwork train_policy(const PolicyDataset& data, PolicyNetwork policy, const FitConfig& config,
                           std::uint64_t seed) {
  config.validate();
  require(data.inputs.rows() == policy.mlp().input_dim() && data.controls.rows() == policy.control_dim(),
          "train_policy: dataset does not match the policy dimensions");
  const std::size_t n = data.size();
  if (n == 0) return policy;
  Adam adam(policy.mlp().num_params(), config.adam);
  Rng rng = make_rng(seed, 0x706f6c00);
  std::vector<std::size_t> order;
  std::size_t cursor = 0;
  const std::size_t batch_size = std::min<std::size_t>(static_cast<std::size_t>(config.batch_size), n);
  const int steps = config.steps_for(n);

  Mat inputs(data.inputs.rows(), static_cast<Eigen::Index>(batch_size));
  Mat controls(data.controls.rows(), static_cast<Eigen::Index>(batch_size));
  Vec grad(policy.mlp().num_params());
  Mlp::Tape tape;
  for (int s = 0; s < steps; ++s) {
    const auto batch = next_batch(order, cursor, n, batch_size, rng);
    for (std::size_t b = 0; b < batch_size; ++b) {
      inputs.col(static_cast<Eigen::Index>(b)) = data.inputs.col(static_cast<Eigen::Index>(batch[b]));
      controls.col(static_cast<Eigen::Index>(b)) = data.controls.col(static_cast<Eigen::Index>(batch[b]));
    }
    const Mat err = policy.mlp().forward_batch(inputs, &tape) - controls;
    grad.setZero();
    policy.mlp().backward(tape, 2.0 * err, grad);
    adam.step(policy.mlp().params(), grad);
  }
  check_finite(policy.mlp().params(), "train_policy");
  return policy;
}

}  // namespace tvmpc
