#pragma once

#include <vector>

#include "tvmpc/core/env_model.hpp"
#include "tvmpc/core/types.hpp"

namespace tvmpc {

/// Fully connected network with tanh hidden layers and a linear output layer.
///
/// Parameters live in one flat vector, layer by layer: W_l (column-major,
/// out x in) followed by b_l. Inputs go through a fixed `InputNormalization`
/// before the first layer, so the first weight matrix has
/// `normalization().feature_dim()` columns. Evaluation is const and thread-safe.
class Mlp {
 public:
  Mlp() = default;
  /// `dims` = {input, hidden..., output}; parameters are zero-initialized.
  Mlp(std::vector<int> dims, InputNormalization normalization);

  /// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights and biases.
  static Mlp random(std::vector<int> dims, InputNormalization normalization, Rng& rng);

  int input_dim() const { return dims_.front(); }
  int output_dim() const { return dims_.back(); }
  int num_layers() const { return static_cast<int>(dims_.size()) - 1; }
  const std::vector<int>& dims() const { return dims_; }
  const InputNormalization& normalization() const { return normalization_; }

  Eigen::Index num_params() const { return theta_.size(); }
  const Vec& params() const { return theta_; }
  Vec& params() { return theta_; }

  Eigen::Map<const Mat> weight(int layer) const;
  Eigen::Map<Mat> weight(int layer);
  Eigen::Map<const Vec> bias(int layer) const;
  Eigen::Map<Vec> bias(int layer);

  /// Feature vector fed to the first layer for a raw input vector.
  Vec normalize(const Vec& input) const;

  Vec forward(const Vec& input) const;
  /// Output and its Jacobian with respect to the first `columns` raw input entries.
  Vec forward_jacobian(const Vec& input, int columns, Mat& jacobian) const;

  /// Batched forward pass; inputs are columns. Keeps activations for `backward`.
  struct Tape {
    std::vector<Mat> activations;  // activations[0] = normalized input
  };
  Mat forward_batch(const Mat& inputs, Tape* tape = nullptr) const;
  /// Accumulates dL/dtheta into `grad` given dL/doutput (columns per sample).
  void backward(const Tape& tape, const Mat& output_grad, Vec& grad) const;

 private:
  /// d(features)/d(first `columns` raw inputs).
  Mat normalize_jacobian(const Vec& input, int columns) const;

  std::vector<int> dims_;
  std::vector<int> widths_;  // dims_ with the input replaced by the feature count
  InputNormalization normalization_;
  Vec theta_;
  std::vector<Eigen::Index> weight_offset_, bias_offset_;
};

}  // namespace tvmpc
