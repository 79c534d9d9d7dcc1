#include <doctest.h>

#include <cmath>
#include <numeric>

#include "tvmpc/envs/lqr1d.hpp"
#include "tvmpc/envs/pendulum.hpp"
#include "tvmpc/envs/point_env.hpp"
#include "tvmpc/mpc/rollout.hpp"
#include "tvmpc/net/value_network.hpp"

using namespace tvmpc;

namespace {

const double kGolden = (1.0 + std::sqrt(5.0)) / 2.0;

std::shared_ptr<const TerminalCost> riccati_terminal() {
  return std::make_shared<QuadraticTerminal>(Mat::Constant(1, 1, kGolden));
}

Vec vec2(double a, double b) { return (Vec(2) << a, b).finished(); }

MpcConfig tight(int horizon) {
  MpcConfig c;
  c.horizon = horizon;
  c.solver = SolverConfig::offline();
  c.solver.kkt_tolerance = 1e-9;
  return c;
}

}  // namespace

TEST_CASE("LQR with the Riccati terminal applies the optimal feedback") {
  auto env = std::make_shared<envs::Lqr1dEnv>();
  for (int T : {1, 3, 8}) {
    MpcController mpc(env, riccati_terminal(), MpcConfig{T, SolverConfig::online()});
    const ControlStep step = mpc.control(Vec::Constant(1, 1.0));
    CHECK_FALSE(step.degraded);
    CHECK(std::abs(step.u[0] + kGolden / (1.0 + kGolden)) < 1e-6);
  }
  MpcController mpc(env, riccati_terminal(), MpcConfig{});
  CHECK(mpc.control(Vec::Zero(1)).u.norm() < 1e-8);
}

TEST_CASE("adding a constant to the terminal cost leaves the control unchanged") {
  auto env = std::make_shared<envs::PointEnv>();
  Rng rng = make_rng(11, 0);
  auto net = std::make_shared<const ValueNetwork>(
      ValueNetwork::random(2, 0, {16, 16}, 8, env->state_normalization(), rng, 1.0 / env->dt()));
  auto terminal = std::make_shared<NetworkTerminal>(net, Vec());
  auto shifted = std::make_shared<ShiftedTerminal>(terminal, 10.0);
  for (int i = 0; i < 5; ++i) {
    const Vec x = env->sample_state(rng);
    MpcController a(env, terminal, tight(10));
    MpcController b(env, shifted, tight(10));
    const ControlStep ua = a.control(x);
    const ControlStep ub = b.control(x);
    CHECK((ua.u - ub.u).norm() < 1e-6);
    CHECK(b.last_solve().optimal_cost == doctest::Approx(a.last_solve().optimal_cost + 10.0).epsilon(1e-9));
  }
}

TEST_CASE("re-solving at the predicted state reproduces the predicted control") {
  auto env = std::make_shared<envs::Lqr1dEnv>();
  MpcController mpc(env, riccati_terminal(), tight(6));
  Vec x = Vec::Constant(1, 0.9);
  for (int k = 0; k < 5; ++k) {
    mpc.control(x);
    const Trajectory plan = mpc.last_solve().trajectory;
    const ControlStep next = mpc.control(plan.states[1]);
    CHECK((next.u - plan.controls[1]).norm() < 1e-8 * 10.0);
    x = plan.states[1];
  }
}

TEST_CASE("an infeasible start yields an error trace") {
  auto env = std::make_shared<envs::PointEnv>();
  MpcController mpc(env, nullptr, MpcConfig{});
  const ControlStep step = mpc.control(vec2(0.0, 0.0));
  CHECK(step.infeasible);
  CHECK(step.u.norm() == 0.0);
  const MpcTrace trace = mpc_rollout(*env, vec2(0.0, 0.0), mpc, RolloutConfig{});
  CHECK(trace.infeasible_start);
  CHECK(trace.steps() == 0);
  CHECK_FALSE(trace.error.empty());
}

TEST_CASE("closed-loop traces are consistent and respect the hard constraints") {
  auto env = std::make_shared<envs::PointEnv>();
  Rng rng = make_rng(12, 0);
  for (int i = 0; i < 4; ++i) {
    const Vec x0 = env->sample_state(rng);
    MpcController mpc(env, nullptr, MpcConfig{});
    const MpcTrace trace = mpc_rollout(*env, x0, mpc, RolloutConfig{120, 0.1});
    REQUIRE(trace.steps() == 120);
    CHECK(trace.states.size() == 121);
    const double total = std::accumulate(trace.running_costs.begin(), trace.running_costs.end(), 0.0);
    CHECK(trace.cumulative_cost == doctest::Approx(total).epsilon(1e-12));
    CHECK(trace.max_violation <= 1e-3);
    if (trace.reached) CHECK(trace.running_costs.back() < 0.1);
    for (std::size_t k = 0; k < trace.controls.size(); ++k) {
      CHECK(trace.running_costs[k] == doctest::Approx(env->stage_cost(trace.states[k], trace.controls[k])));
    }

    MpcController again(env, nullptr, MpcConfig{});
    const MpcTrace repeat = mpc_rollout(*env, x0, again, RolloutConfig{120, 0.1});
    CHECK(repeat.states.back() == trace.states.back());
  }
}

TEST_CASE("pendulum controls stay inside the torque limits") {
  auto env = std::make_shared<envs::PendulumEnv>();
  MpcController mpc(env, nullptr, MpcConfig{10, SolverConfig::online()});
  const MpcTrace trace = mpc_rollout(*env, vec2(0.0, 0.0), mpc, RolloutConfig{80, 0.1});
  REQUIRE(trace.steps() == 80);
  for (const auto& u : trace.controls) CHECK(std::abs(u[0]) <= 2.0 + 1e-6);
  CHECK(trace.max_violation <= 1e-3);
}

TEST_CASE("without a terminal cost the point gets stuck behind the obstacle") {
  auto env = std::make_shared<envs::PointEnv>();
  MpcController mpc(env, nullptr, MpcConfig{10, SolverConfig::online()});
  const MpcTrace trace = mpc_rollout(*env, vec2(-0.7, 0.0), mpc, RolloutConfig{400, 0.1});
  CHECK_FALSE(trace.reached);
  CHECK(std::abs(env->signed_distance(trace.states.back())) < 0.05);
  const std::size_t n = trace.running_costs.size();
  CHECK(std::abs(trace.running_costs[n - 1] - trace.running_costs[n - 50]) < 1e-3);
  CHECK(trace.max_violation <= 1e-3);
}

TEST_CASE("batch rollouts are independent of the worker count") {
  auto env = std::make_shared<envs::PointEnv>();
  SingleTask dist(env);
  Rng rng = make_rng(13, 0);
  std::vector<Task> tasks;
  for (int i = 0; i < 6; ++i) tasks.push_back(dist.sample_task(rng));
  const ControllerFactory factory = [](const Task& t) {
    return std::make_unique<MpcController>(t.model, nullptr, MpcConfig{5, SolverConfig::online()});
  };
  const auto serial = batch_rollouts(tasks, factory, RolloutConfig{40, 0.1}, 1);
  const auto parallel = batch_rollouts(tasks, factory, RolloutConfig{40, 0.1}, 3);
  REQUIRE(serial.size() == tasks.size());
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    CHECK(serial[i].states.front() == tasks[i].x);
    CHECK(serial[i].states.back() == parallel[i].states.back());
    CHECK(serial[i].cumulative_cost == parallel[i].cumulative_cost);
  }
  const RolloutSummary s = summarize(serial);
  CHECK(s.rollouts == tasks.size());
  double mean = 0.0;
  for (const auto& t : serial) mean += t.cumulative_cost / static_cast<double>(serial.size());
  CHECK(s.mean_cost == doctest::Approx(mean));
  CHECK(s.reach_rate >= 0.0);
  CHECK(s.reach_rate <= 1.0);

  const RolloutSummary empty = summarize({});
  CHECK(empty.rollouts == 0);
  CHECK(empty.mean_cost == 0.0);
}

TEST_CASE("policy controller evaluates the network") {
  Rng rng = make_rng(14, 0);
  auto policy = std::make_shared<const PolicyNetwork>(
      PolicyNetwork::random(2, 0, {8}, 2, InputNormalization::identity(2), rng));
  PolicyController ctl(policy, Vec());
  const Vec x = vec2(0.3, -0.2);
  CHECK(ctl.control(x).u == policy->control(x));
  CHECK_FALSE(ctl.control(x).degraded);
}
