#pragma once

#include "tvmpc/core/types.hpp"

namespace tvmpc {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  /// Decoupled: theta <- theta - lr * weight_decay * theta, independent of the moments.
  double weight_decay = 0.0;
};

/// Adam with decoupled weight decay.
class Adam {
 public:
  Adam() = default;
  Adam(Eigen::Index num_params, AdamConfig config);

  void step(Vec& params, const Vec& gradient);

  long steps() const { return steps_; }
  const AdamConfig& config() const { return config_; }
  const Vec& first_moment() const { return m_; }
  const Vec& second_moment() const { return v_; }

 private:
  AdamConfig config_;
  Vec m_, v_;
  long steps_ = 0;
};

}  // namespace tvmpc
