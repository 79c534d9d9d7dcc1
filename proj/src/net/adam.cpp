#include "tvmpc/net/adam.hpp"

#include <cmath>

#include "tvmpc/core/errors.hpp"

namespace tvmpc {

Adam::Adam(Eigen::Index num_params, AdamConfig config)
    : config_(config), m_(Vec::Zero(num_params)), v_(Vec::Zero(num_params)) {
  require(config_.learning_rate > 0.0 && config_.epsilon > 0.0 && config_.weight_decay >= 0.0,
          "adam: invalid configuration");
  require(config_.beta1 >= 0.0 && config_.beta1 < 1.0 && config_.beta2 >= 0.0 && config_.beta2 < 1.0,
          "adam: betas must lie in [0, 1)");
}

void Adam::step(Vec& params, const Vec& gradient) {
  require(params.size() == m_.size() && gradient.size() == m_.size(), "adam: dimension mismatch");
  ++steps_;
  m_ = config_.beta1 * m_ + (1.0 - config_.beta1) * gradient;
  v_ = config_.beta2 * v_ + (1.0 - config_.beta2) * gradient.cwiseAbs2();
  const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(steps_));
  const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(steps_));
  if (config_.weight_decay > 0.0) params *= 1.0 - config_.learning_rate * config_.weight_decay;
  params.array() -= config_.learning_rate * (m_.array() / c1) / ((v_.array() / c2).sqrt() + config_.epsilon);
}

}  // namespace tvmpc
