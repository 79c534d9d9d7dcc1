#pragma once

#include <vector>

#include "tvmpc/core/types.hpp"

namespace tvmpc {

/// Regression records for the value network. Inputs are columns (state followed by
/// context). `anchor[j]` indexes a column of `anchors` holding the stationary input
/// tied to record j, or -1 when the record has no task-specific anchor.
struct Dataset {
  Mat inputs;
  std::vector<double> targets;
  std::vector<int> anchor;
  Mat anchors;

  std::size_t size() const { return targets.size(); }
  bool empty() const { return targets.empty(); }

  explicit Dataset(int input_dim = 0) : inputs(input_dim, 0), anchors(input_dim, 0) {}

  void add(const Vec& input, double target, int anchor_index = -1);
  /// Appends an anchor column and returns its index.
  int add_anchor(const Vec& input);
  void append(const Dataset& other);
  /// Throws NumericalError if any target is non-finite or negative.
  void validate() const;
};

/// State(+context) -> first optimal control records for the policy baseline.
struct PolicyDataset {
  Mat inputs;
  Mat controls;

  PolicyDataset(int input_dim = 0, int control_dim = 0) : inputs(input_dim, 0), controls(control_dim, 0) {}
  std::size_t size() const { return static_cast<std::size_t>(inputs.cols()); }
  void add(const Vec& input, const Vec& control);
};

}  // namespace tvmpc
