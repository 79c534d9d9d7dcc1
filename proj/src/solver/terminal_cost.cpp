#include "tvmpc/solver/terminal_cost.hpp"

#include "tvmpc/core/errors.hpp"

namespace tvmpc {

QuadraticTerminal::QuadraticTerminal(Mat P, Vec ref) : P_(std::move(P)), ref_(std::move(ref)) {
  require(P_.rows() == P_.cols(), "QuadraticTerminal: P must be square");
  if (ref_.size() == 0) ref_ = Vec::Zero(P_.rows());
  require(ref_.size() == P_.rows(), "QuadraticTerminal: reference dimension mismatch");
}

double QuadraticTerminal::value(const StateVec& x) const {
  const Vec e = x - ref_;
  return e.dot(P_ * e);
}

double QuadraticTerminal::derivatives(const StateVec& x, Vec& gradient, Mat& hessian) const {
  const Vec e = x - ref_;
  hessian = P_ + P_.transpose();
  gradient = hessian * e;
  return e.dot(P_ * e);
}

}  // namespace tvmpc
