#include "tvmpc/envs/rounded_rect.hpp"

#include <algorithm>
#include <cmath>

namespace tvmpc::envs {

double RoundedRect::signed_distance(const Eigen::Vector2d& p) const {
  const Eigen::Vector2d q = (p - center).cwiseAbs() - half_extents;
  const double outside = q.cwiseMax(0.0).norm();
  const double inside = std::min(std::max(q.x(), q.y()), 0.0);
  return outside + inside - corner_radius;
}

Eigen::Vector2d RoundedRect::gradient(const Eigen::Vector2d& p) const {
  const Eigen::Vector2d d = p - center;
  const Eigen::Vector2d sign(d.x() >= 0.0 ? 1.0 : -1.0, d.y() >= 0.0 ? 1.0 : -1.0);
  const Eigen::Vector2d q = d.cwiseAbs() - half_extents;
  Eigen::Vector2d g = Eigen::Vector2d::Zero();
  if (q.x() > 0.0 || q.y() > 0.0) {
    const Eigen::Vector2d qp = q.cwiseMax(0.0);
    g = qp / qp.norm();
  } else if (q.x() > q.y()) {
    g.x() = 1.0;
  } else {
    g.y() = 1.0;
  }
  return g.cwiseProduct(sign);
}

bool RoundedRect::segment_intersects(const Eigen::Vector2d& a, const Eigen::Vector2d& b, int samples) const {
  for (int i = 0; i <= samples; ++i) {
    const double t = static_cast<double>(i) / samples;
    if (signed_distance((1.0 - t) * a + t * b) < 0.0) return true;
  }
  return false;
}

}  // namespace tvmpc::envs
