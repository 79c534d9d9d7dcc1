#pragma once

#include <cstdint>

#include "tvmpc/net/adam.hpp"
#include "tvmpc/net/policy_network.hpp"
#include "tvmpc/net/value_network.hpp"
#include "tvmpc/train/dataset.hpp"

namespace tvmpc {

struct FitConfig {
  AdamConfig adam{1e-3, 0.9, 0.999, 1e-8, 1e-4};
  int batch_size = 64;
  /// Mini-batch steps per fit; ignored when `epochs` > 0.
  int sgd_steps = 80;
  /// Full passes over the shuffled dataset per fit.
  int epochs = 0;

  int steps_for(std::size_t dataset_size) const;
  void validate() const;
};

struct FitStats {
  int steps = 0;
  /// Mean per-record loss over all steps.
  double mean_loss = 0.0;
  /// Mean per-record loss over the last pass (or last 10% of steps).
  double final_loss = 0.0;
};

/// Mini-batch Adam on the value loss. Owns the optimizer state and shuffling stream
/// so successive fits continue the same optimization.
class ValueFitter {
 public:
  ValueFitter(Eigen::Index num_params, FitConfig config, std::uint64_t seed);

  /// Every batch is anchored at all columns of `global_anchors` and at the anchors
  /// referenced by its records. `alpha` is relative to means: the summed loss uses
  /// alpha * batch / anchors as its anchor weight.
  FitStats fit(ValueNetwork& net, const Dataset& data, const Mat& global_anchors, double alpha);

  const FitConfig& config() const { return config_; }

 private:
  FitConfig config_;
  Adam adam_;
  Rng rng_;
  std::vector<std::size_t> order_;
  std::size_t cursor_ = 0;
};

/// Plain regression of `net` onto ground-truth values with the same loss.
ValueNetwork train_supervised_value(const Dataset& data, ValueNetwork net, const FitConfig& config, double alpha,
                                    const Mat& global_anchors, std::uint64_t seed);

/// Mean-squared-error regression of the first optimal control.
PolicyNetwork train_policy(const PolicyDataset& data, PolicyNetwork policy, const FitConfig& config,
                           std::uint64_t seed);

}  // namespace tvmpc
