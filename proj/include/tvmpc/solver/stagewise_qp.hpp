#pragma once

#include <vector>

#include "tvmpc/core/types.hpp"

namespace tvmpc {

/// One stage k < T of the local QP
///
///   min  1/2 dx'Q dx + du'S dx + 1/2 du'R du + q'dx + r'du
///   s.t. dx_{k+1} = A dx + B du + d,   G dx + H du + e >= 0
///
/// S is nu x nx.
struct QpStage {
  Mat A, B;
  Vec d;
  Mat Q, R, S;
  Vec q, r;
  Mat G, H;
  Vec e;
};

/// Stagewise QP with dx_0 = 0 and a terminal block on dx_T.
struct StagewiseQp {
  int nx = 0;
  int nu = 0;
  std::vector<QpStage> stages;
  Mat QT;
  Vec qT;
  Mat GT;
  Vec eT;

  int horizon() const { return static_cast<int>(stages.size()); }
  /// Allocates zero-filled stages with `rows[k]` inequality rows (`rows[T]` terminal).
  static StagewiseQp zeros(int nx, int nu, int horizon, const std::vector<int>& rows);
};

struct QpSolution {
  std::vector<Vec> dx;      ///< T + 1 entries, dx[0] = 0
  std::vector<Vec> du;      ///< T entries
  std::vector<Vec> lambda;  ///< inequality multipliers (>= 0), T + 1 entries
  std::vector<Vec> costate; ///< dynamics multipliers, costate[k] pairs with dx[k] (costate[0] unused)
  int iterations = 0;
  double residual = 0.0;
  bool converged = false;
};

struct QpSettings {
  int max_iterations = 200;
  double tolerance = 1e-10;
  double regularization = 1e-10;
};

/// Primal-dual interior-point solver for `StagewiseQp`. Every Newton system is
/// eliminated with a Riccati recursion, so the cost per iteration is linear in T and
/// the dense KKT matrix is never formed. Mehrotra predictor-corrector steps.
class StagewiseQpSolver {
 public:
  QpSolution solve(const StagewiseQp& qp, const QpSettings& settings = {});

 private:
  struct Stage {
    Mat Quu, Qux, K;
    Eigen::LLT<Mat> llt;
  };

  void factorize(const StagewiseQp& qp, double regularization);
  void solve_newton(const StagewiseQp& qp, const std::vector<Vec>& lin_x, const std::vector<Vec>& lin_u,
                    std::vector<Vec>& step_x, std::vector<Vec>& step_u);
  double stationarity(const StagewiseQp& qp, QpSolution& sol);

  struct Workspace {
    Mat Qxx, M, PA, PB, WG, WH;
    Vec p, next, ru, y;
    std::vector<Vec> kff;
  };

  std::vector<Stage> stages_;
  std::vector<Vec> w_;  // lambda / s per stage
  Mat P_;
  Workspace ws_;
};

}  // namespace tvmpc
