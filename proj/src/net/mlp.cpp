#include "tvmpc/net/mlp.hpp"

#include <cmath>

#include "tvmpc/core/errors.hpp"

namespace tvmpc {

Mlp::Mlp(std::vector<int> dims, InputNormalization normalization)
    : dims_(std::move(dims)), normalization_(std::move(normalization)) {
  require(dims_.size() >= 2, "mlp: need at least input and output dimensions");
  for (int d : dims_) require(d >= 1, "mlp: layer widths must be positive");
  require(static_cast<int>(normalization_.dim()) == dims_.front(), "mlp: normalization does not match input dim");
  require(normalization_.periodic.size() == normalization_.dim() && normalization_.scale.size() == normalization_.offset.size(),
          "mlp: inconsistent normalization");
  widths_ = dims_;
  widths_.front() = static_cast<int>(normalization_.feature_dim());
  Eigen::Index offset = 0;
  for (int l = 0; l < num_layers(); ++l) {
    weight_offset_.push_back(offset);
    offset += static_cast<Eigen::Index>(widths_[l + 1]) * widths_[l];
    bias_offset_.push_back(offset);
    offset += dims_[l + 1];
  }
  theta_ = Vec::Zero(offset);
}

Mlp Mlp::random(std::vector<int> dims, InputNormalization normalization, Rng& rng) {
  Mlp net(std::move(dims), std::move(normalization));
  for (int l = 0; l < net.num_layers(); ++l) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(net.widths_[l]));
    std::uniform_real_distribution<double> dist(-bound, bound);
    auto W = net.weight(l);
    for (Eigen::Index j = 0; j < W.cols(); ++j)
      for (Eigen::Index i = 0; i < W.rows(); ++i) W(i, j) = dist(rng);
    auto b = net.bias(l);
    for (Eigen::Index i = 0; i < b.size(); ++i) b[i] = dist(rng);
  }
  return net;
}

Eigen::Map<const Mat> Mlp::weight(int layer) const {
  return {theta_.data() + weight_offset_[layer], widths_[layer + 1], widths_[layer]};
}
Eigen::Map<Mat> Mlp::weight(int layer) {
  return {theta_.data() + weight_offset_[layer], widths_[layer + 1], widths_[layer]};
}
Eigen::Map<const Vec> Mlp::bias(int layer) const { return {theta_.data() + bias_offset_[layer], dims_[layer + 1]}; }
Eigen::Map<Vec> Mlp::bias(int layer) { return {theta_.data() + bias_offset_[layer], dims_[layer + 1]}; }

Vec Mlp::normalize(const Vec& input) const {
  require(input.size() == input_dim(), "mlp: expected input of size " + std::to_string(input_dim()) + ", got " +
                                           std::to_string(input.size()));
  Vec z(widths_.front());
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < input.size(); ++i) {
    const double shifted = input[i] - normalization_.offset[i];
    if (normalization_.periodic[i]) {
      z[k++] = std::sin(shifted);
      z[k++] = std::cos(shifted);
    } else {
      z[k++] = shifted / normalization_.scale[i];
    }
  }
  return z;
}

Mat Mlp::normalize_jacobian(const Vec& input, int columns) const {
  Mat D = Mat::Zero(widths_.front(), columns);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < input.size(); ++i) {
    const bool periodic = normalization_.periodic[i];
    if (i < columns) {
      if (periodic) {
        const double shifted = input[i] - normalization_.offset[i];
        D(k, i) = std::cos(shifted);
        D(k + 1, i) = -std::sin(shifted);
      } else {
        D(k, i) = 1.0 / normalization_.scale[i];
      }
    }
    k += periodic ? 2 : 1;
  }
  return D;
}

Vec Mlp::forward(const Vec& input) const {
  Vec h = normalize(input);
  for (int l = 0; l < num_layers(); ++l) {
    Vec a = bias(l);
    a.noalias() += weight(l) * h;
    h = (l + 1 < num_layers()) ? Vec(a.array().tanh()) : std::move(a);
  }
  return h;
}

Vec Mlp::forward_jacobian(const Vec& input, int columns, Mat& jacobian) const {
  require(columns >= 0 && columns <= input_dim(), "mlp: bad Jacobian column count");
  Vec h = normalize(input);
  Mat J = weight(0) * normalize_jacobian(input, columns);
  for (int l = 0; l < num_layers(); ++l) {
    Vec a = bias(l);
    a.noalias() += weight(l) * h;
    if (l > 0) J = weight(l) * J;
    if (l + 1 < num_layers()) {
      h = a.array().tanh();
      J = (1.0 - h.array().square()).matrix().asDiagonal() * J;
    } else {
      h = std::move(a);
    }
  }
  jacobian = std::move(J);
  return h;
}

Mat Mlp::forward_batch(const Mat& inputs, Tape* tape) const {
  require(inputs.rows() == input_dim(), "mlp: batch has wrong input dimension");
  Mat h(widths_.front(), inputs.cols());
  for (Eigen::Index j = 0; j < inputs.cols(); ++j) h.col(j) = normalize(inputs.col(j));
  if (tape) {
    tape->activations.clear();
    tape->activations.push_back(h);
  }
  for (int l = 0; l < num_layers(); ++l) {
    Mat a = weight(l) * h;
    a.colwise() += bias(l);
    if (l + 1 < num_layers()) a = a.array().tanh();
    h = std::move(a);
    if (tape) tape->activations.push_back(h);
  }
  return h;
}

void Mlp::backward(const Tape& tape, const Mat& output_grad, Vec& grad) const {
  require(grad.size() == num_params(), "mlp: gradient buffer has wrong size");
  Mat delta = output_grad;  // dL/da for the current layer
  for (int l = num_layers() - 1; l >= 0; --l) {
    const Mat& input = tape.activations[l];
    Eigen::Map<Mat>(grad.data() + weight_offset_[l], widths_[l + 1], widths_[l]).noalias() += delta * input.transpose();
    Eigen::Map<Vec>(grad.data() + bias_offset_[l], dims_[l + 1]) += delta.rowwise().sum();
    if (l > 0) {
      Mat back = weight(l).transpose() * delta;
      delta = back.array() * (1.0 - input.array().square());
    }
  }
}

}  // namespace tvmpc
