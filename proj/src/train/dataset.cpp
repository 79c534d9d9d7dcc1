#include "tvmpc/train/dataset.hpp"

#include <cmath>

#include "tvmpc/core/errors.hpp"

namespace tvmpc {
namespace {

void push_column(Mat& m, const Vec& v) {
  require(v.size() == m.rows(), "dataset: input dimension mismatch");
  m.conservativeResize(Eigen::NoChange, m.cols() + 1);
  m.col(m.cols() - 1) = v;
}

}  // namespace

void Dataset::add(const Vec& input, double target, int anchor_index) {
  require(anchor_index >= -1 && anchor_index < anchors.cols(), "dataset: anchor index out of range");
  push_column(inputs, input);
  targets.push_back(target);
  anchor.push_back(anchor_index);
}

int Dataset::add_anchor(const Vec& input) {
  push_column(anchors, input);
  return static_cast<int>(anchors.cols() - 1);
}

void Dataset::append(const Dataset& other) {
  require(other.inputs.rows() == inputs.rows(), "dataset: cannot append records of another dimension");
  const auto offset = static_cast<int>(anchors.cols());
  const Eigen::Index n = inputs.cols();
  inputs.conservativeResize(Eigen::NoChange, n + other.inputs.cols());
  inputs.rightCols(other.inputs.cols()) = other.inputs;
  const Eigen::Index a = anchors.cols();
  anchors.conservativeResize(Eigen::NoChange, a + other.anchors.cols());
  anchors.rightCols(other.anchors.cols()) = other.anchors;
  targets.insert(targets.end(), other.targets.begin(), other.targets.end());
  for (int idx : other.anchor) anchor.push_back(idx < 0 ? -1 : idx + offset);
}

void Dataset::validate() const {
  for (double t : targets) {
    if (!std::isfinite(t) || t < 0.0) throw NumericalError("dataset: target " + std::to_string(t) + " is not finite and nonnegative");
  }
}

void PolicyDataset::add(const Vec& input, const Vec& control) {
  push_column(inputs, input);
  push_column(controls, control);
}

}  // namespace tvmpc
