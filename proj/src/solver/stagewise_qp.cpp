#include "tvmpc/solver/stagewise_qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tvmpc/core/errors.hpp"

namespace tvmpc {
namespace {

constexpr double kFractionToBoundary = 0.995;
/// Smallest complementarity target, relative to the tolerance.
constexpr double kMuFloor = 0.1;

const Mat& rows_G(const StagewiseQp& qp, int k) { return k < qp.horizon() ? qp.stages[k].G : qp.GT; }
const Vec& rows_e(const StagewiseQp& qp, int k) { return k < qp.horizon() ? qp.stages[k].e : qp.eT; }

/// Largest alpha with v + alpha * dv >= 0 (infinity if dv >= 0).
double max_step(const std::vector<Vec>& v, const std::vector<Vec>& dv) {
  double alpha = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < v.size(); ++k) {
    for (Eigen::Index i = 0; i < v[k].size(); ++i) {
      if (dv[k][i] < 0.0) alpha = std::min(alpha, -v[k][i] / dv[k][i]);
    }
  }
  return alpha;
}

}  // namespace

StagewiseQp StagewiseQp::zeros(int nx, int nu, int horizon, const std::vector<int>& rows) {
  require(static_cast<int>(rows.size()) == horizon + 1, "StagewiseQp::zeros: need horizon + 1 row counts");
  StagewiseQp qp;
  qp.nx = nx;
  qp.nu = nu;
  qp.stages.resize(horizon);
  for (int k = 0; k < horizon; ++k) {
    QpStage& s = qp.stages[k];
    s.A = Mat::Zero(nx, nx);
    s.B = Mat::Zero(nx, nu);
    s.d = Vec::Zero(nx);
    s.Q = Mat::Zero(nx, nx);
    s.R = Mat::Zero(nu, nu);
    s.S = Mat::Zero(nu, nx);
    s.q = Vec::Zero(nx);
    s.r = Vec::Zero(nu);
    s.G = Mat::Zero(rows[k], nx);
    s.H = Mat::Zero(rows[k], nu);
    s.e = Vec::Zero(rows[k]);
  }
  qp.QT = Mat::Zero(nx, nx);
  qp.qT = Vec::Zero(nx);
  qp.GT = Mat::Zero(rows[horizon], nx);
  qp.eT = Vec::Zero(rows[horizon]);
  return qp;
}

void StagewiseQpSolver::factorize(const StagewiseQp& qp, double regularization) {
  const int T = qp.horizon();
  stages_.resize(T);
  P_ = qp.QT;
  if (qp.GT.rows() > 0) P_.noalias() += qp.GT.transpose() * w_[T].asDiagonal() * qp.GT;
  Mat& Qxx = ws_.Qxx;
  Mat& M = ws_.M;
  for (int k = T - 1; k >= 0; --k) {
    const QpStage& s = qp.stages[k];
    Stage& st = stages_[k];
    Qxx = s.Q;
    st.Quu = s.R;
    st.Qux = s.S;
    if (s.G.rows() > 0) {
      ws_.WG = w_[k].asDiagonal() * s.G;
      ws_.WH = w_[k].asDiagonal() * s.H;
      Qxx.noalias() += s.G.transpose() * ws_.WG;
      st.Quu.noalias() += s.H.transpose() * ws_.WH;
      st.Qux.noalias() += s.H.transpose() * ws_.WG;
    }
    ws_.PA.noalias() = P_ * s.A;
    ws_.PB.noalias() = P_ * s.B;
    Qxx.noalias() += s.A.transpose() * ws_.PA;
    st.Quu.noalias() += s.B.transpose() * ws_.PB;
    st.Qux.noalias() += s.B.transpose() * ws_.PA;

    double reg = regularization;
    for (int attempt = 0;; ++attempt) {
      M = st.Quu;
      M.diagonal().array() += reg;
      st.llt.compute(M);
      if (st.llt.info() == Eigen::Success) break;
      if (attempt > 12) throw NumericalError("stagewise QP: control Hessian is not positive definite");
      reg = std::max(reg * 100.0, 1e-8);
    }
    st.K = st.Qux;
    st.llt.solveInPlace(st.K);
    st.K *= -1.0;
    P_ = Qxx;
    P_.noalias() += st.Qux.transpose() * st.K;
    ws_.M = P_.transpose();
    P_ += ws_.M;
    P_ *= 0.5;
  }
}

void StagewiseQpSolver::solve_newton(const StagewiseQp& qp, const std::vector<Vec>& lin_x,
                                     const std::vector<Vec>& lin_u, std::vector<Vec>& step_x,
                                     std::vector<Vec>& step_u) {
  const int T = qp.horizon();
  auto& kff = ws_.kff;
  kff.resize(T);
  Vec& p = ws_.p;
  Vec& next = ws_.next;
  p = lin_x[T];
  for (int k = T - 1; k >= 0; --k) {
    const QpStage& s = qp.stages[k];
    const Stage& st = stages_[k];
    kff[k] = lin_u[k];
    kff[k].noalias() += s.B.transpose() * p;
    st.llt.solveInPlace(kff[k]);
    kff[k] *= -1.0;
    next = lin_x[k];
    next.noalias() += s.A.transpose() * p;
    next.noalias() += st.Qux.transpose() * kff[k];
    p.swap(next);
  }
  step_x[0].setZero(qp.nx);
  for (int k = 0; k < T; ++k) {
    const QpStage& s = qp.stages[k];
    step_u[k] = kff[k];
    step_u[k].noalias() += stages_[k].K * step_x[k];
    step_x[k + 1].noalias() = s.A * step_x[k];
    step_x[k + 1].noalias() += s.B * step_u[k];
  }
}

double StagewiseQpSolver::stationarity(const StagewiseQp& qp, QpSolution& sol) {
  const int T = qp.horizon();
  auto& costate = sol.costate;
  Vec& ru = ws_.ru;
  costate[T] = qp.qT;
  costate[T].noalias() += qp.QT * sol.dx[T];
  if (qp.GT.rows() > 0) costate[T].noalias() -= qp.GT.transpose() * sol.lambda[T];
  double worst = 0.0;
  for (int k = T - 1; k >= 0; --k) {
    const QpStage& s = qp.stages[k];
    const Vec& nu = costate[k + 1];
    ru = s.r;
    ru.noalias() += s.R * sol.du[k];
    ru.noalias() += s.S * sol.dx[k];
    ru.noalias() += s.B.transpose() * nu;
    if (s.H.rows() > 0) ru.noalias() -= s.H.transpose() * sol.lambda[k];
    if (ru.size() > 0) worst = std::max(worst, ru.lpNorm<Eigen::Infinity>());
    Vec& next = costate[k];
    next = s.q;
    next.noalias() += s.Q * sol.dx[k];
    next.noalias() += s.S.transpose() * sol.du[k];
    next.noalias() += s.A.transpose() * nu;
    if (s.G.rows() > 0) next.noalias() -= s.G.transpose() * sol.lambda[k];
  }
  return worst;
}

QpSolution StagewiseQpSolver::solve(const StagewiseQp& qp, const QpSettings& settings) {
  const int T = qp.horizon();
  require(T >= 1, "stagewise QP: horizon must be >= 1");
  QpSolution sol;
  sol.dx.assign(T + 1, Vec::Zero(qp.nx));
  sol.du.assign(T, Vec::Zero(qp.nu));
  sol.costate.assign(T + 1, Vec::Zero(qp.nx));
  for (int k = 0; k < T; ++k) sol.dx[k + 1] = qp.stages[k].A * sol.dx[k] + qp.stages[k].d;

  std::vector<Vec> s(T + 1), a(T + 1), rp(T + 1), ds(T + 1), dl(T + 1), rc(T + 1);
  sol.lambda.resize(T + 1);
  w_.resize(T + 1);
  int rows = 0;
  for (int k = 0; k <= T; ++k) {
    const Mat& G = rows_G(qp, k);
    a[k] = G * sol.dx[k] + rows_e(qp, k);
    if (k < T) a[k].noalias() += qp.stages[k].H * sol.du[k];
    s[k] = a[k].cwiseMax(1.0);
    sol.lambda[k] = Vec::Ones(a[k].size());
    rows += static_cast<int>(a[k].size());
  }

  std::vector<Vec> lin_x(T + 1), lin_u(T), step_x(T + 1), step_u(T);
  std::vector<Vec> gx(T + 1), gu(T);

  auto gradients = [&]() {
    for (int k = 0; k < T; ++k) {
      const QpStage& st = qp.stages[k];
      gx[k] = st.q;
      gx[k].noalias() += st.Q * sol.dx[k];
      gx[k].noalias() += st.S.transpose() * sol.du[k];
      gu[k] = st.r;
      gu[k].noalias() += st.R * sol.du[k];
      gu[k].noalias() += st.S * sol.dx[k];
    }
    gx[T] = qp.qT;
    gx[T].noalias() += qp.QT * sol.dx[T];
  };
  // lin = grad - G'lambda + G'((rc + lambda .* rp) ./ s)
  auto linear_terms = [&]() {
    for (int k = 0; k <= T; ++k) {
      lin_x[k] = gx[k];
      if (a[k].size() == 0) {
        if (k < T) lin_u[k] = gu[k];
        continue;
      }
      Vec& y = ws_.y;
      y = (rc[k].array() + sol.lambda[k].array() * rp[k].array()) / s[k].array() - sol.lambda[k].array();
      lin_x[k].noalias() += rows_G(qp, k).transpose() * y;
      if (k < T) {
        lin_u[k] = gu[k];
        lin_u[k].noalias() += qp.stages[k].H.transpose() * y;
      }
    }
  };
  auto slack_steps = [&]() {
    for (int k = 0; k <= T; ++k) {
      if (a[k].size() == 0) {
        ds[k].resize(0);
        dl[k].resize(0);
        continue;
      }
      ds[k] = rows_G(qp, k) * step_x[k] + rp[k];
      if (k < T) ds[k].noalias() += qp.stages[k].H * step_u[k];
      dl[k] = -(rc[k].array() + sol.lambda[k].array() * ds[k].array()) / s[k].array();
    }
  };

  if (rows == 0) {
    gradients();
    for (int k = 0; k <= T; ++k) rc[k].resize(0);
    factorize(qp, settings.regularization);
    linear_terms();
    solve_newton(qp, lin_x, lin_u, step_x, step_u);
    for (int k = 0; k <= T; ++k) sol.dx[k] += step_x[k];
    for (int k = 0; k < T; ++k) sol.du[k] += step_u[k];
    sol.iterations = 1;
    sol.residual = stationarity(qp, sol);
    sol.converged = sol.residual <= std::max(settings.tolerance, 1e-8);
    return sol;
  }

  for (int it = 0;; ++it) {
    gradients();
    double mu = 0.0, primal = 0.0;
    for (int k = 0; k <= T; ++k) {
      a[k] = rows_G(qp, k) * sol.dx[k] + rows_e(qp, k);
      if (k < T) a[k].noalias() += qp.stages[k].H * sol.du[k];
      rp[k] = a[k] - s[k];
      mu += s[k].dot(sol.lambda[k]);
      if (rp[k].size() > 0) primal = std::max(primal, rp[k].lpNorm<Eigen::Infinity>());
    }
    mu /= rows;
    sol.residual = std::max({stationarity(qp, sol), primal, mu});
    sol.iterations = it;
    if (!std::isfinite(sol.residual)) throw NumericalError("stagewise QP: non-finite residual");
    if (sol.residual <= settings.tolerance) {
      sol.converged = true;
      break;
    }
    // Once complementarity is far below the tolerance the barrier weights only
    // degrade the factorization; keep the current point.
    if (it >= settings.max_iterations || (mu < kMuFloor * settings.tolerance && primal <= settings.tolerance)) break;

    for (int k = 0; k <= T; ++k) w_[k] = sol.lambda[k].cwiseQuotient(s[k]);
    factorize(qp, settings.regularization);

    // Predictor.
    for (int k = 0; k <= T; ++k) rc[k] = s[k].cwiseProduct(sol.lambda[k]);
    linear_terms();
    solve_newton(qp, lin_x, lin_u, step_x, step_u);
    slack_steps();
    const double alpha_aff = std::min({1.0, max_step(s, ds), max_step(sol.lambda, dl)});
    double mu_aff = 0.0;
    for (int k = 0; k <= T; ++k) {
      mu_aff += (s[k] + alpha_aff * ds[k]).dot(sol.lambda[k] + alpha_aff * dl[k]);
    }
    mu_aff /= rows;
    const double sigma = std::pow(mu_aff / mu, 3);

    // Corrector.
    for (int k = 0; k <= T; ++k) {
      rc[k] = s[k].cwiseProduct(sol.lambda[k]) + ds[k].cwiseProduct(dl[k]);
      rc[k].array() -= std::max(sigma * mu, kMuFloor * settings.tolerance);
    }
    linear_terms();
    solve_newton(qp, lin_x, lin_u, step_x, step_u);
    slack_steps();
    const double alpha = std::min(1.0, kFractionToBoundary * std::min(max_step(s, ds), max_step(sol.lambda, dl)));

    bool finite = std::isfinite(sigma);
    for (int k = 0; k <= T; ++k) finite = finite && step_x[k].allFinite() && ds[k].allFinite() && dl[k].allFinite();
    if (!finite) throw NumericalError("stagewise QP: non-finite step");
    for (int k = 0; k <= T; ++k) {
      sol.dx[k] += alpha * step_x[k];
      s[k] += alpha * ds[k];
      sol.lambda[k] += alpha * dl[k];
    }
    for (int k = 0; k < T; ++k) sol.du[k] += alpha * step_u[k];
  }
  return sol;
}

}  // namespace tvmpc
