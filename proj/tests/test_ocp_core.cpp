#include <doctest.h>

#include <cmath>
#include <numbers>

#include "tvmpc/core/errors.hpp"
#include "tvmpc/core/trajectory.hpp"
#include "tvmpc/envs/lqr1d.hpp"
#include "tvmpc/envs/pendulum.hpp"
#include "tvmpc/envs/point_env.hpp"

using namespace tvmpc;
using namespace tvmpc::envs;

namespace {

Vec vec(std::initializer_list<double> v) {
  Vec out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

// Independent central-difference Jacobian (kept separate from the library helper).
template <typename Fn>
Mat numeric_jacobian(Fn f, const Vec& z, double h) {
  const Vec f0 = f(z);
  Mat J(f0.size(), z.size());
  for (Eigen::Index j = 0; j < z.size(); ++j) {
    Vec a = z, b = z;
    a[j] += h;
    b[j] -= h;
    J.col(j) = (f(a) - f(b)) / (2 * h);
  }
  return J;
}

double rel_err(const Mat& a, const Mat& b) {
  return (a - b).norm() / std::max(1.0, b.norm());
}

}  // namespace

TEST_CASE("step reproduces the closed-form dynamics") {
  PendulumEnv pendulum;
  CHECK(step(pendulum, vec({0.0, 0.0}), vec({0.0})).isZero(0.0));

  PointEnv point;
  const Vec next = step(point, vec({0.0, 0.0}), vec({1.0, 0.0}));
  CHECK(next[0] == doctest::Approx(0.02).epsilon(1e-15));
  CHECK(next[1] == 0.0);

  Lqr1dEnv lqr;
  CHECK(step(lqr, vec({1.0}), vec({-0.5}))[0] == doctest::Approx(0.5));
}

TEST_CASE("step rejects dimension mismatches") {
  PendulumEnv pendulum;
  CHECK_THROWS_AS(step(pendulum, vec({0.0}), vec({0.0})), ContractViolation);
  CHECK_THROWS_AS(step(pendulum, vec({0.0, 0.0}), vec({0.0, 1.0})), ContractViolation);
  PointEnv point;
  const std::vector<ControlVec> bad{vec({1.0})};
  CHECK_THROWS_AS(rollout(point, vec({0.0, 0.0}), bad), ContractViolation);
}

TEST_CASE("rollout examples") {
  SUBCASE("pendulum at downward rest stays put, each stage costs cos 0 + 1") {
    PendulumEnv pendulum;
    const std::vector<ControlVec> zeros(10, vec({0.0}));
    const Trajectory traj = rollout(pendulum, vec({0.0, 0.0}), zeros);
    REQUIRE(traj.states.size() == 11);
    for (const auto& x : traj.states) CHECK(x.isZero(0.0));
    CHECK(traj.cumulative_cost() == doctest::Approx(20.0));
  }
  SUBCASE("point env at its target accumulates nothing") {
    PointEnv point;
    const std::vector<ControlVec> zeros(25, vec({0.0, 0.0}));
    CHECK(rollout(point, point.params().target, zeros).cumulative_cost() == 0.0);
  }
  SUBCASE("scalar LQR") {
    Lqr1dEnv lqr;
    const std::vector<ControlVec> controls{vec({-0.5})};
    const Trajectory traj = rollout(lqr, vec({1.0}), controls);
    CHECK(traj.states.back()[0] == doctest::Approx(0.5));
    CHECK(traj.cumulative_cost() == doctest::Approx(1.25));
  }
}

TEST_CASE("rollout cumulative cost equals the independently summed stage costs") {
  PendulumEnv pendulum;
  Rng rng = make_rng(3);
  std::vector<ControlVec> controls;
  for (int k = 0; k < 40; ++k) controls.push_back(vec({uniform(rng, -2, 2)}));
  const Vec x0 = vec({0.3, -1.0});
  const Trajectory traj = rollout(pendulum, x0, controls);
  double sum = 0.0;
  Vec x = x0;
  for (const auto& u : controls) {
    sum += std::cos(x[0]) + 1.0 + 0.01 * x[1] * x[1] + 0.001 * u[0] * u[0];
    x = pendulum.dynamics(x, u);
  }
  CHECK(traj.cumulative_cost() == sum);
}

TEST_CASE("linearize: linear systems have constant Jacobians") {
  PointEnv point;
  Rng rng = make_rng(5);
  for (int i = 0; i < 5; ++i) {
    const StageDerivatives d = linearize(point, point.sample_state(rng), vec({uniform(rng, -1, 1), uniform(rng, -1, 1)}));
    CHECK(d.A.isApprox(Mat::Identity(2, 2)));
    CHECK(d.B.isApprox(0.02 * Mat::Identity(2, 2)));
  }
  Lqr1dEnv lqr;
  const StageDerivatives d = linearize(lqr, vec({0.4}), vec({-0.2}));
  CHECK(d.A(0, 0) == 1.0);
  CHECK(d.B(0, 0) == 1.0);
}

TEST_CASE("linearize: pendulum at (pi/4, 0, 0) matches central finite differences") {
  PendulumEnv pendulum;
  const Vec x = vec({std::numbers::pi / 4, 0.0});
  const Vec u = vec({0.0});
  const StageDerivatives d = linearize(pendulum, x, u);
  const Mat A_fd = numeric_jacobian([&](const Vec& z) { return pendulum.dynamics(z, u); }, x, 1e-6);
  const Mat B_fd = numeric_jacobian([&](const Vec& v) { return pendulum.dynamics(x, v); }, u, 1e-6);
  CHECK(rel_err(d.A, A_fd) < 1e-5);
  CHECK(rel_err(d.B, B_fd) < 1e-5);
}

TEST_CASE("linearize matches finite differences on 100 random points per environment") {
  std::vector<std::shared_ptr<const EnvModel>> models{
      std::make_shared<PendulumEnv>(), std::make_shared<PointEnv>(), std::make_shared<Lqr1dEnv>(Lqr1dEnv::Params{1.0, -0.3})};
  Rng rng = make_rng(11);
  for (const auto& model : models) {
    CAPTURE(model->name());
    for (int i = 0; i < 100; ++i) {
      const Vec x = model->sample_state(rng);
      Vec u(model->nu());
      for (Eigen::Index j = 0; j < u.size(); ++j) u[j] = uniform(rng, -1.5, 1.5);
      const StageDerivatives d = linearize(*model, x, u);
      auto f_x = [&](const Vec& z) { return model->dynamics(z, u); };
      auto f_u = [&](const Vec& v) { return model->dynamics(x, v); };
      auto l_x = [&](const Vec& z) { return Vec::Constant(1, model->stage_cost(z, u)); };
      auto l_u = [&](const Vec& v) { return Vec::Constant(1, model->stage_cost(x, v)); };
      CHECK(rel_err(d.A, numeric_jacobian(f_x, x, 1e-6)) < 1e-4);
      CHECK(rel_err(d.B, numeric_jacobian(f_u, u, 1e-6)) < 1e-4);
      CHECK(rel_err(d.cost.lx.transpose(), numeric_jacobian(l_x, x, 1e-6)) < 1e-4);
      CHECK(rel_err(d.cost.lu.transpose(), numeric_jacobian(l_u, u, 1e-6)) < 1e-4);
      if (model->nc() > 0) {
        auto c_x = [&](const Vec& z) { return model->constraint(z, u); };
        auto c_u = [&](const Vec& v) { return model->constraint(x, v); };
        CHECK(rel_err(d.cx, numeric_jacobian(c_x, x, 1e-6)) < 1e-4);
        CHECK(rel_err(d.cu, numeric_jacobian(c_u, u, 1e-6)) < 1e-4);
      }
      // Gauss-Newton Hessians are PSD.
      Mat H(model->nx() + model->nu(), model->nx() + model->nu());
      H << d.cost.lxx, d.cost.lux.transpose(), d.cost.lux, d.cost.luu;
      CHECK(Eigen::SelfAdjointEigenSolver<Mat>(H).eigenvalues().minCoeff() >= -1e-12);
    }
  }
}

TEST_CASE("stationary samples pass the zero-cost / fixed-point / feasibility test") {
  std::vector<std::shared_ptr<const EnvModel>> models{std::make_shared<PendulumEnv>(), std::make_shared<PointEnv>(),
                                                      std::make_shared<Lqr1dEnv>()};
  Rng rng = make_rng(1);
  for (const auto& model : models) {
    CAPTURE(model->name());
    const StationaryPoint s = model->sample_stationary(rng);
    CHECK(std::abs(model->stage_cost(s.x, s.u)) <= 1e-10);
    CHECK((model->dynamics(s.x, s.u) - s.x).lpNorm<Eigen::Infinity>() <= 1e-10);
    const Vec c = model->constraint(s.x, s.u);
    if (c.size() > 0) CHECK(c.minCoeff() >= -1e-10);
  }
}

TEST_CASE("finite-difference fallback is used when a model has no analytic derivatives") {
  struct Cubic final : EnvModel {
    std::string name() const override { return "cubic"; }
    int nx() const override { return 1; }
    int nu() const override { return 1; }
    double dt() const override { return 0.1; }
    StateVec dynamics(const StateVec& x, const ControlVec& u) const override {
      return Vec::Constant(1, x[0] + 0.1 * (x[0] * x[0] * x[0] + u[0]));
    }
    double stage_cost(const StateVec& x, const ControlVec& u) const override { return x[0] * x[0] + u[0] * u[0]; }
    StateVec sample_state(Rng& rng) const override { return Vec::Constant(1, uniform(rng, -1, 1)); }
    StationaryPoint sample_stationary(Rng&) const override { return {Vec::Zero(1), Vec::Zero(1)}; }
  };
  Cubic model;
  const StageDerivatives d = linearize(model, vec({0.5}), vec({0.2}));
  CHECK(d.A(0, 0) == doctest::Approx(1.0 + 0.1 * 3 * 0.25).epsilon(1e-8));
  CHECK(d.B(0, 0) == doctest::Approx(0.1).epsilon(1e-8));
  CHECK(d.cost.lx[0] == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(d.cost.luu(0, 0) == doctest::Approx(2.0).epsilon(1e-5));
}

TEST_CASE("non-finite derivatives are reported") {
  PendulumEnv pendulum;
  CHECK_THROWS_AS(linearize(pendulum, vec({std::nan(""), 0.0}), vec({0.0})), NumericalError);
}
