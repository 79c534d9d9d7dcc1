#include <doctest.h>

#include <cmath>
#include <numbers>

#include "tvmpc/envs/lqr1d.hpp"
#include "tvmpc/envs/pendulum.hpp"
#include "tvmpc/envs/point_env.hpp"
#include "tvmpc/solver/sqp_solver.hpp"

using namespace tvmpc;
using namespace tvmpc::envs;

namespace {

Vec vec(std::initializer_list<double> v) {
  Vec out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

OcpProblem lqr_problem(std::optional<double> u_min, std::shared_ptr<const TerminalCost> terminal) {
  OcpProblem p;
  p.env = std::make_shared<Lqr1dEnv>(Lqr1dEnv::Params{1.0, u_min});
  p.horizon = 1;
  p.terminal = std::move(terminal);
  p.x0 = vec({1.0});
  return p;
}

std::shared_ptr<const EnvModel> free_point(const Eigen::Vector2d& target) {
  PointEnv::Params p;
  p.has_obstacle = false;
  p.target = target;
  return std::make_shared<PointEnv>(p);
}

// Brute-force search for the T = 2 point problem without terminal cost. x_2 carries no
// cost, so u_1 = 0 and only u_0 needs to be enumerated.
double grid_oracle_cost(const Eigen::Vector2d& x0, const Eigen::Vector2d& target, double pitch) {
  const double dt = 0.02;
  double best = std::numeric_limits<double>::infinity();
  const int n = static_cast<int>(std::round(2.0 / pitch));
  for (int i = 0; i <= n; ++i) {
    for (int j = 0; j <= n; ++j) {
      const Eigen::Vector2d u(-1.0 + i * pitch, -1.0 + j * pitch);
      const Eigen::Vector2d x1 = x0 + dt * u;
      const double cost = (x0 - target).squaredNorm() + 0.1 * u.squaredNorm() + (x1 - target).squaredNorm();
      best = std::min(best, cost);
    }
  }
  return best;
}

}  // namespace

TEST_CASE("scalar LQR, T = 1: closed-form minimizers") {
  SqpSolver solver;
  SUBCASE("no terminal cost") {
    const SolveResult r = solver.solve(lqr_problem(std::nullopt, nullptr), SolverConfig::offline());
    CHECK(r.converged);
    CHECK(r.trajectory.controls[0][0] == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(r.optimal_cost == doctest::Approx(1.0).epsilon(1e-9));
  }
  SUBCASE("terminal V = x^2") {
    auto V = std::make_shared<QuadraticTerminal>(Mat::Identity(1, 1));
    const SolveResult r = solver.solve(lqr_problem(std::nullopt, V), SolverConfig::offline());
    CHECK(r.converged);
    CHECK(r.trajectory.controls[0][0] == doctest::Approx(-0.5).epsilon(1e-9));
    CHECK(r.optimal_cost == doctest::Approx(1.5).epsilon(1e-9));
    CHECK(r.iterations == 1);
  }
  SUBCASE("terminal V = x^2 with u >= 0") {
    auto V = std::make_shared<QuadraticTerminal>(Mat::Identity(1, 1));
    const SolveResult r = solver.solve(lqr_problem(0.0, V), SolverConfig::offline());
    CHECK(r.converged);
    CHECK(std::abs(r.trajectory.controls[0][0]) < 1e-6);
    CHECK(r.optimal_cost == doctest::Approx(2.0).epsilon(1e-6));
  }
}

TEST_CASE("point env, T = 2: cost matches the brute-force grid within 1%") {
  SqpSolver solver;
  SolverConfig config;
  config.kkt_tolerance = 1e-6;
  const Eigen::Vector2d target(0.6, 0.0);
  OcpProblem p;
  p.env = free_point(target);
  p.horizon = 2;
  p.x0 = vec({-0.5, 0.0});
  const SolveResult r = solver.solve(p, config);
  REQUIRE(r.converged);
  CHECK(r.kkt_residual <= 1e-6);
  const double oracle = grid_oracle_cost(Eigen::Vector2d(-0.5, 0.0), target, 0.01);
  CHECK(std::abs(r.optimal_cost - oracle) <= 0.01 * oracle);
  CHECK(r.optimal_cost <= oracle + 1e-12);
}

TEST_CASE("terminal-cost shift leaves the controls unchanged") {
  SqpSolver solver;
  Rng rng = make_rng(4);
  for (int trial = 0; trial < 5; ++trial) {
    Mat P = Mat::Identity(2, 2) * uniform(rng, 1, 20);
    auto V = std::make_shared<QuadraticTerminal>(P, Vec(Eigen::Vector2d(0.6, 0.0)));
    auto V10 = std::make_shared<ShiftedTerminal>(V, 10.0);
    OcpProblem p;
    p.env = std::make_shared<PointEnv>();
    p.horizon = 10;
    p.x0 = p.env->sample_state(rng);
    p.terminal = V;
    const SolveResult a = solver.solve(p, SolverConfig::offline());
    p.terminal = V10;
    const SolveResult b = solver.solve(p, SolverConfig::offline());
    REQUIRE(a.converged);
    REQUIRE(b.converged);
    for (int k = 0; k < p.horizon; ++k) {
      CHECK((a.trajectory.controls[k] - b.trajectory.controls[k]).lpNorm<Eigen::Infinity>() < 1e-6);
    }
    CHECK(b.optimal_cost - a.optimal_cost == doctest::Approx(10.0).epsilon(1e-9));
  }
}

TEST_CASE("pendulum swing-up OCP: bounds, dynamics consistency and merit monotonicity") {
  SqpSolver solver;
  Rng rng = make_rng(12);
  auto env = std::make_shared<PendulumEnv>();
  int converged = 0;
  for (int trial = 0; trial < 30; ++trial) {
    OcpProblem p;
    p.env = env;
    p.horizon = 20;
    p.x0 = env->sample_state(rng);
    const SolveResult r = solver.solve(p, SolverConfig::offline());
    for (std::size_t i = 1; i < r.merit_history.size(); ++i) {
      CHECK(r.merit_history[i] <= r.merit_history[i - 1] + 1e-12 * std::max(1.0, std::abs(r.merit_history[i - 1])));
    }
    for (const auto& u : r.trajectory.controls) CHECK(std::abs(u[0]) <= 2.0 + 1e-6);
    if (r.converged) {
      ++converged;
      CHECK(r.trajectory.dynamics_defect < 1e-8);
      CHECK(r.kkt_residual <= 1e-4);
      CHECK(r.optimal_cost >= 0.0);
    }
  }
  CHECK(converged >= 27);
}

TEST_CASE("point env with obstacle: solutions respect the obstacle") {
  SqpSolver solver;
  Rng rng = make_rng(21);
  auto env = std::make_shared<PointEnv>();
  for (int trial = 0; trial < 30; ++trial) {
    OcpProblem p;
    p.env = env;
    p.horizon = 10;
    p.x0 = env->sample_state(rng);
    const SolveResult r = solver.solve(p, SolverConfig::offline());
    CHECK(r.converged);
    for (const auto& x : r.trajectory.states) CHECK(env->signed_distance(x) >= -1e-6);
  }
}

TEST_CASE("infeasible initial state is reported, not solved") {
  SqpSolver solver;
  OcpProblem p;
  p.env = std::make_shared<PointEnv>();
  p.horizon = 5;
  p.x0 = vec({0.0, 0.0});
  const SolveResult r = solver.solve(p, SolverConfig::offline());
  CHECK_FALSE(r.converged);
  CHECK(r.status == SolveStatus::InfeasibleStart);
  CHECK_FALSE(r.message.empty());
}

TEST_CASE("warm start from a converged solution converges immediately") {
  SqpSolver solver;
  auto env = std::make_shared<PendulumEnv>();
  OcpProblem p;
  p.env = env;
  p.horizon = 15;
  p.x0 = vec({0.5, 1.0});
  const SolveResult cold = solver.solve(p, SolverConfig::offline());
  REQUIRE(cold.converged);
  const SolveResult warm = solver.solve(p, SolverConfig::offline(), &cold.trajectory);
  CHECK(warm.converged);
  CHECK(warm.iterations <= 2);
  CHECK(warm.optimal_cost == doctest::Approx(cold.optimal_cost).epsilon(1e-6));
}

TEST_CASE("shift_trajectory drops the first stage and repeats the last") {
  Trajectory t;
  t.states = {vec({0}), vec({1}), vec({2})};
  t.controls = {vec({10}), vec({11})};
  t.stage_costs = {0, 0};
  const Trajectory s = shift_trajectory(t);
  REQUIRE(s.horizon() == 2);
  CHECK(s.states[0][0] == 1);
  CHECK(s.states[2][0] == 2);
  CHECK(s.controls[0][0] == 11);
  CHECK(s.controls[1][0] == 11);
}

TEST_CASE("solver config validation") {
  SolverConfig c;
  c.kkt_tolerance = 0.0;
  CHECK_THROWS(c.validate());
}
