#include "tvmpc/core/env_model.hpp"

#include <cmath>
#include <numbers>

#include "tvmpc/core/errors.hpp"
#include "tvmpc/core/trajectory.hpp"

namespace tvmpc {

InputNormalization InputNormalization::identity(std::size_t dim) {
  const auto n = static_cast<Eigen::Index>(dim);
  return {Vec::Zero(n), Vec::Ones(n), std::vector<bool>(dim, false)};
}

std::size_t InputNormalization::feature_dim() const {
  std::size_t n = dim();
  for (bool p : periodic) n += p ? 1 : 0;
  return n;
}

Vec EnvModel::constraint(const StateVec&, const ControlVec&) const { return Vec(0); }

Vec EnvModel::omega_constraint(const StateVec&) const { return Vec(0); }

void EnvModel::dynamics_jacobians(const StateVec& x, const ControlVec& u, Mat& A, Mat& B) const {
  A = fd::jacobian([&](const Vec& z) { return dynamics(z, u); }, x);
  B = fd::jacobian([&](const Vec& v) { return dynamics(x, v); }, u);
}

void EnvModel::cost_derivatives(const StateVec& x, const ControlVec& u, CostDerivatives& out) const {
  const int n = nx(), m = nu();
  Vec z(n + m);
  z << x, u;
  auto cost = [&](const Vec& w) { return stage_cost(w.head(n), w.tail(m)); };
  auto grad = [&](const Vec& w) { return fd::gradient(cost, w, 1e-6); };
  const Vec g = grad(z);
  Mat H = fd::jacobian(grad, z, 1e-4);
  H = 0.5 * (H + H.transpose()).eval();
  out.lx = g.head(n);
  out.lu = g.tail(m);
  out.lxx = H.topLeftCorner(n, n);
  out.luu = H.bottomRightCorner(m, m);
  out.lux = H.bottomLeftCorner(m, n);
}

void EnvModel::constraint_jacobians(const StateVec& x, const ControlVec& u, Mat& cx, Mat& cu) const {
  if (nc() == 0) {
    cx.resize(0, nx());
    cu.resize(0, nu());
    return;
  }
  cx = fd::jacobian([&](const Vec& z) { return constraint(z, u); }, x);
  cu = fd::jacobian([&](const Vec& v) { return constraint(x, v); }, u);
}

Mat EnvModel::omega_jacobian(const StateVec& x) const {
  if (n_omega() == 0) return Mat(0, nx());
  return fd::jacobian([&](const Vec& z) { return omega_constraint(z); }, x);
}

SingleTask::SingleTask(std::shared_ptr<const EnvModel> model) : model_(std::move(model)) {
  require(model_ != nullptr, "SingleTask: null model");
}

}  // namespace tvmpc
