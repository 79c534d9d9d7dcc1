#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace tvmpc {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Per-environment semantics: pendulum (theta, theta_dot), point env (x, y), lqr1d (x).
using StateVec = Eigen::VectorXd;
using ControlVec = Eigen::VectorXd;

/// Every sampler takes an explicit engine so parallel workers can own independent streams.
using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return Rng(seq);
}

inline double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

}  // namespace tvmpc
