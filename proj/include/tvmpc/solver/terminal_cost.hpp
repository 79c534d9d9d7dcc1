#pragma once

#include <memory>

#include "tvmpc/core/types.hpp"

namespace tvmpc {

/// Terminal value V(x_T) consumed by the OCP solver. Implementations must be safe to
/// evaluate concurrently (no mutation on evaluation).
class TerminalCost {
 public:
  virtual ~TerminalCost() = default;

  virtual double value(const StateVec& x) const = 0;
  /// Returns V(x) and fills its gradient and a PSD (Gauss-Newton) Hessian.
  virtual double derivatives(const StateVec& x, Vec& gradient, Mat& hessian) const = 0;
};

/// V(x) = (x - ref)' P (x - ref).
class QuadraticTerminal final : public TerminalCost {
 public:
  explicit QuadraticTerminal(Mat P, Vec ref = Vec());

  double value(const StateVec& x) const override;
  double derivatives(const StateVec& x, Vec& gradient, Mat& hessian) const override;

 private:
  Mat P_;
  Vec ref_;
};

/// V(x) + offset; the minimizer of any OCP is unchanged by the shift.
class ShiftedTerminal final : public TerminalCost {
 public:
  ShiftedTerminal(std::shared_ptr<const TerminalCost> base, double offset)
      : base_(std::move(base)), offset_(offset) {}

  double value(const StateVec& x) const override { return base_->value(x) + offset_; }
  double derivatives(const StateVec& x, Vec& gradient, Mat& hessian) const override {
    return base_->derivatives(x, gradient, hessian) + offset_;
  }

 private:
  std::shared_ptr<const TerminalCost> base_;
  double offset_;
};

}  // namespace tvmpc
