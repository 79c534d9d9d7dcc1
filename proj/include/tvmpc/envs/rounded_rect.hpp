#pragma once

#include <Eigen/Dense>

namespace tvmpc::envs {

/// Axis-aligned rectangle Minkowski-summed with a disc. Outside the inner rectangle
/// the signed distance is C^1; the boundary itself is C^1 everywhere.
struct RoundedRect {
  Eigen::Vector2d center{0.0, 0.0};
  Eigen::Vector2d half_extents{0.3, 0.15};
  double corner_radius = 0.05;

  /// Exact signed distance, negative inside.
  double signed_distance(const Eigen::Vector2d& p) const;
  /// Gradient of `signed_distance` (unit norm almost everywhere).
  Eigen::Vector2d gradient(const Eigen::Vector2d& p) const;
  /// True if the segment a->b passes through the obstacle interior.
  bool segment_intersects(const Eigen::Vector2d& a, const Eigen::Vector2d& b, int samples = 400) const;
};

}  // namespace tvmpc::envs
