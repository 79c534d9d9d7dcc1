#include <doctest.h>

#include <cmath>
#include <map>

#include "tvmpc/core/errors.hpp"
#include "tvmpc/envs/lqr1d.hpp"
#include "tvmpc/envs/pendulum.hpp"
#include "tvmpc/envs/point_env.hpp"
#include "tvmpc/study/horizon_study.hpp"
#include "tvmpc/train/value_iteration.hpp"

using namespace tvmpc;

namespace {

const double kGolden = (1.0 + std::sqrt(5.0)) / 2.0;

std::shared_ptr<const envs::Lqr1dEnv> lqr() { return std::make_shared<envs::Lqr1dEnv>(); }

std::vector<Task> lqr_tasks(const std::vector<double>& xs) {
  auto env = lqr();
  std::vector<Task> out;
  for (double x : xs) out.push_back({env, Vec::Constant(1, x)});
  return out;
}

// Network whose value is exactly p * x^2: a single linear layer r = w x with s w^2 / 2 = p.
std::shared_ptr<const ValueNetwork> quadratic_net(double p, double scale = 1.0) {
  Mlp mlp({1, 1}, InputNormalization::identity(1));
  mlp.weight(0)(0, 0) = std::sqrt(2.0 * p / scale);
  return std::make_shared<const ValueNetwork>(mlp, 1, scale);
}

// Exact value iteration for x' = x + u, l = x^2 + u^2, written out from the scalar
// Bellman equation: min_u x^2 + u^2 + p (x + u)^2 at u = -p x / (1 + p).
double riccati_step(double p) {
  const double u = -p / (1.0 + p);
  return 1.0 + u * u + p * (1.0 + u) * (1.0 + u);
}

std::vector<double> grid(int n, double lo, double hi) {
  std::vector<double> out;
  for (int i = 0; i < n; ++i) out.push_back(lo + (hi - lo) * i / (n - 1));
  return out;
}

TargetOptions serial() {
  TargetOptions o;
  o.workers = 1;
  return o;
}

}  // namespace

TEST_CASE("scalar Riccati oracle converges to the golden ratio") {
  double p = 0.0;
  double previous = -1.0;
  for (int k = 0; k < 100; ++k) {
    CHECK(p >= previous - 1e-15);
    previous = p;
    p = riccati_step(p);
  }
  CHECK(p == doctest::Approx(kGolden).epsilon(1e-14));
  CHECK(envs::lqr1d_riccati_fixed_point() == doctest::Approx(kGolden).epsilon(1e-14));
  CHECK(kGolden == doctest::Approx(1.6180339887).epsilon(1e-10));
}

TEST_CASE("stationary states have zero Bellman target") {
  auto batch = bellman_targets(lqr_tasks({0.0}), nullptr, 3, serial());
  REQUIRE(batch.data.size() == 1);
  CHECK(std::abs(batch.data.targets[0]) < 1e-12);

  auto pendulum = std::make_shared<envs::PendulumEnv>();
  std::vector<Task> up{{pendulum, (Vec(2) << M_PI, 0.0).finished()}};
  auto up_batch = bellman_targets(up, nullptr, 10, serial());
  REQUIRE(up_batch.data.size() == 1);
  CHECK(std::abs(up_batch.data.targets[0]) < 1e-10);
}

TEST_CASE("LQR at x = 1 with zero terminal and T = 1 has target 1") {
  auto batch = bellman_targets(lqr_tasks({1.0}), nullptr, 1, serial());
  REQUIRE(batch.data.size() == 1);
  CHECK(batch.data.targets[0] == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(std::abs(batch.solutions[0].controls[0][0]) < 1e-6);
}

TEST_CASE("Bellman targets from an exact quadratic value follow the Riccati recursion") {
  const std::vector<double> xs{-1.0, -0.4, 0.25, 0.8, 1.0};
  double p = 0.0;
  for (int k = 0; k < 8; ++k) {
    const auto net = k == 0 ? nullptr : quadratic_net(p, k % 2 == 0 ? 1.0 : 20.0);
    auto batch = bellman_targets(lqr_tasks(xs), net, 1, serial());
    const double next = riccati_step(p);
    REQUIRE(batch.data.size() == xs.size());
    for (std::size_t j = 0; j < xs.size(); ++j) {
      CHECK(batch.data.targets[j] == doctest::Approx(next * xs[j] * xs[j]).epsilon(1e-7));
    }
    p = next;
  }
}

TEST_CASE("longer horizon on the zero function applies the recursion repeatedly") {
  double p = 0.0;
  for (int k = 0; k < 4; ++k) p = riccati_step(p);
  auto batch = bellman_targets(lqr_tasks({1.0}), nullptr, 4, serial());
  CHECK(batch.data.targets[0] == doctest::Approx(p).epsilon(1e-7));
}

TEST_CASE("parallel target generation matches serial") {
  envs::PointEnv::Params params;
  auto env = std::make_shared<envs::PointEnv>(params);
  SingleTask dist(env);
  Rng rng = make_rng(4, 0);
  std::vector<Task> tasks;
  for (int i = 0; i < 24; ++i) tasks.push_back(dist.sample_task(rng));
  auto net = std::make_shared<const ValueNetwork>(
      ValueNetwork::random(2, 0, {16, 16}, 8, env->state_normalization(), rng, dist.value_scale()));

  TargetOptions a = serial();
  TargetOptions b = serial();
  b.workers = 3;
  const auto one = bellman_targets(tasks, net, 5, a);
  const auto many = bellman_targets(tasks, net, 5, b);
  REQUIRE(one.data.size() == many.data.size());
  CHECK(one.stats.dropped == many.stats.dropped);
  for (std::size_t j = 0; j < one.data.size(); ++j) {
    CHECK(one.source[j] == many.source[j]);
    CHECK(std::abs(one.data.targets[j] - many.data.targets[j]) <= 1e-12);
  }
}

TEST_CASE("too many failed solves abort the iteration") {
  auto env = std::make_shared<envs::PendulumEnv>();
  SingleTask dist(env);
  Rng rng = make_rng(5, 0);
  std::vector<Task> tasks;
  for (int i = 0; i < 20; ++i) tasks.push_back(dist.sample_task(rng));
  TargetOptions o = serial();
  o.solver.max_sqp_iterations = 1;
  CHECK_THROWS_AS(bellman_targets(tasks, nullptr, 10, o), TrainingAborted);

  o.max_drop_fraction = 1.0;
  const auto batch = bellman_targets(tasks, nullptr, 10, o);
  CHECK(batch.stats.attempted == tasks.size());
  CHECK(batch.stats.dropped > 0);
  CHECK(batch.data.size() + batch.stats.dropped == tasks.size());
  CHECK_NOTHROW(batch.data.validate());
}

TEST_CASE("rollout data respects the step cap and stops at the goal") {
  envs::PointEnv::Params params;
  params.has_obstacle = false;
  auto env = std::make_shared<envs::PointEnv>(params);
  std::vector<Task> starts{{env, (Vec(2) << -0.9, 0.9).finished()},
                           {env, (Vec(2) << -0.5, -0.7).finished()},
                           {env, params.target}};
  RolloutOptions cap;
  cap.max_steps = 20;
  const auto batch = collect_rollout_data(starts, nullptr, 10, serial(), cap);
  std::map<std::size_t, int> per_start;
  for (auto s : batch.source) ++per_start[s];
  CHECK(per_start[0] == 20);
  CHECK(per_start[1] == 20);
  CHECK(per_start[2] == 1);

  RolloutOptions step_cap;
  step_cap.max_steps = 60;
  const auto longer = collect_rollout_data(starts, nullptr, 10, serial(), step_cap);
  std::map<std::size_t, int> longer_start;
  for (auto s : longer.source) ++longer_start[s];
  for (const auto& [start, count] : longer_start) CHECK(count <= 60);
  for (std::size_t j = 0; j < batch.data.size(); ++j) {
    if (batch.source[j] == 2) CHECK(batch.data.targets[j] < 1e-10);
  }

  const auto again = collect_rollout_data(starts, nullptr, 10, serial(), cap);
  REQUIRE(again.data.size() == batch.data.size());
  CHECK(again.data.inputs == batch.data.inputs);
  CHECK(again.data.targets == batch.data.targets);
}

TEST_CASE("rollout stops once the running cost is below the threshold") {
  envs::PointEnv::Params params;
  params.has_obstacle = false;
  auto env = std::make_shared<envs::PointEnv>(params);
  std::vector<Task> starts{{env, (Vec(2) << 0.3, 0.1).finished()}};
  RolloutOptions opts;
  opts.max_steps = 400;
  const auto batch = collect_rollout_data(starts, nullptr, 10, serial(), opts);
  REQUIRE(batch.data.size() > 1);
  CHECK(batch.data.size() < 400);
  const std::size_t last = batch.data.size() - 1;
  CHECK(batch.solutions[last].stage_costs.front() < 0.1);
  for (std::size_t j = 0; j < last; ++j) CHECK(batch.solutions[j].stage_costs.front() >= 0.1);
}

TEST_CASE("ground truth values saturate with the horizon") {
  const auto lqr_gt = ground_truth_value(lqr_tasks({1.0, 0.0}), serial());
  REQUIRE(lqr_gt.data.size() == 2);
  CHECK(std::abs(lqr_gt.data.targets[0] - kGolden) < 1e-3);
  CHECK(std::abs(lqr_gt.data.targets[1]) < 1e-12);

  envs::PointEnv::Params params;
  params.has_obstacle = false;
  auto env = std::make_shared<envs::PointEnv>(params);
  std::vector<Task> start{{env, (Vec(2) << -0.5, 0.0).finished()}};
  const auto h200 = ground_truth_value(start, serial(), 200);
  const auto h400 = ground_truth_value(start, serial(), 400);
  REQUIRE(h200.data.size() == 1);
  REQUIRE(h400.data.size() == 1);
  CHECK(std::abs(h200.data.targets[0] - h400.data.targets[0]) < 1e-4);
}

TEST_CASE("supervised value fit overfits a small set and is deterministic") {
  Rng rng = make_rng(6, 0);
  Dataset data(2);
  for (int i = 0; i < 10; ++i) {
    Vec x(2);
    x << uniform(rng, -1, 1), uniform(rng, -1, 1);
    data.add(x, 0.5 + x.squaredNorm());
  }
  FitConfig config;
  config.batch_size = 10;
  config.sgd_steps = 3000;
  config.adam.weight_decay = 0.0;
  const ValueNetwork init = ValueNetwork::random(2, 0, {64, 64}, 16, InputNormalization::identity(2), rng);
  const Mat no_anchor(2, 0);
  const ValueNetwork fit = train_supervised_value(data, init, config, 0.0, no_anchor, 3);
  double mse = 0.0;
  for (std::size_t j = 0; j < data.size(); ++j) {
    const double e = fit.value(data.inputs.col(static_cast<Eigen::Index>(j))) - data.targets[j];
    mse += e * e / static_cast<double>(data.size());
  }
  CHECK(mse < 1e-4);

  const ValueNetwork again = train_supervised_value(data, init, config, 0.0, no_anchor, 3);
  CHECK(again.residual().params() == fit.residual().params());
}

TEST_CASE("supervised value on LQR ground truth matches the Riccati value") {
  Rng rng = make_rng(7, 0);
  std::vector<double> xs;
  for (int i = 0; i < 200; ++i) xs.push_back(uniform(rng, -1.0, 1.0));
  const auto gt = ground_truth_value(lqr_tasks(xs), serial());
  REQUIRE(gt.data.size() == xs.size());

  FitConfig config;
  config.sgd_steps = 6000;
  const Mat anchor = Mat::Zero(1, 1);
  const ValueNetwork init = ValueNetwork::random(1, 0, {32, 32}, 16, InputNormalization::identity(1), rng);
  const ValueNetwork net = train_supervised_value(gt.data, init, config, 1.0, anchor, 1);
  double worst = 0.0;
  for (double x : grid(41, -1.0, 1.0)) worst = std::max(worst, std::abs(net.value(Vec::Constant(1, x)) - kGolden * x * x));
  CHECK(worst <= 0.02);
}

TEST_CASE("policy regression recovers the LQR feedback gain") {
  const auto gt = ground_truth_trajectories(lqr_tasks(grid(101, -1.0, 1.0)), serial(), 1);
  REQUIRE(gt.policy.size() == 101);
  Rng rng = make_rng(8, 0);
  FitConfig config;
  config.sgd_steps = 4000;
  const PolicyNetwork init = PolicyNetwork::random(1, 0, {32, 32}, 1, InputNormalization::identity(1), rng);
  const PolicyNetwork policy = train_policy(gt.policy, init, config, 2);
  double worst = 0.0;
  for (double x : grid(41, -1.0, 1.0)) {
    const double expected = -kGolden * x / (1.0 + kGolden);
    worst = std::max(worst, std::abs(policy.control(Vec::Constant(1, x))[0] - expected));
  }
  CHECK(worst <= 0.05);

  const PolicyNetwork again = train_policy(gt.policy, init, config, 2);
  CHECK(again.mlp().params() == policy.mlp().params());
}

TEST_CASE("value iteration is reproducible and reports every iteration") {
  SingleTask dist(lqr());
  ViConfig config;
  config.iterations = 6;
  config.samples = 40;
  config.horizon = 1;
  config.hidden = {16, 16};
  config.residual_dim = 8;
  config.checkpoint_every = 4;
  std::vector<int> checkpoints;
  ViHooks hooks;
  hooks.on_checkpoint = [&](int k, const ValueNetwork&) { checkpoints.push_back(k); };
  const ViResult a = value_iteration(dist, config, hooks);
  const ViResult b = value_iteration(dist, config);
  CHECK(a.net.residual().params() == b.net.residual().params());
  REQUIRE(a.metrics.size() == 6);
  CHECK(checkpoints == std::vector<int>{4, 6});
  CHECK(a.metrics[0].dataset_size == 40);
  CHECK(a.metrics[0].dropped == 0);
  // The first iteration has no terminal cost, so its residual is the mean target.
  CHECK(a.metrics[0].bellman_residual > 0.0);
  CHECK(a.net.output_scale() == doctest::Approx(1.0));
}

TEST_CASE("value iteration on LQR approaches the Riccati value") {
  SingleTask dist(lqr());
  ViConfig config;
  config.iterations = 120;
  config.samples = 200;
  config.horizon = 1;
  config.hidden = {32, 32};
  config.residual_dim = 16;
  config.fit.sgd_steps = 200;
  const ViResult r = value_iteration(dist, config);
  double worst = 0.0;
  for (double x : grid(41, -1.0, 1.0)) worst = std::max(worst, std::abs(r.net.value(Vec::Constant(1, x)) - kGolden * x * x));
  CHECK(worst <= 0.05);
  CHECK(r.metrics.back().anchor_value < 1e-2);
}

TEST_CASE("conditioned tasks anchor every record at its own stationary point") {
  envs::ConditionedPointTasks dist;
  ViConfig config;
  config.iterations = 2;
  config.samples = 6;
  config.horizon = 3;
  config.hidden = {16};
  config.residual_dim = 8;
  config.augmentation = Augmentation::Rollout;
  config.rollout_max_steps = 5;
  const ViResult r = value_iteration(dist, config);
  REQUIRE(r.metrics.size() == 2);
  CHECK(r.metrics[0].dataset_size <= 30);
  CHECK(r.metrics[0].dataset_size >= 6);
  CHECK(r.net.state_dim() == 2);
  CHECK(r.net.context_dim() == 4);
}

TEST_CASE("configuration validation") {
  ViConfig config;
  config.iterations = 0;
  CHECK_THROWS_AS(config.validate(), ConfigError);
  config = ViConfig{};
  config.alpha = -1.0;
  CHECK_THROWS_AS(config.validate(), ConfigError);
  config = ViConfig{};
  config.fit.batch_size = 0;
  CHECK_THROWS_AS(config.validate(), ConfigError);
  CHECK(parse_augmentation("last_state") == Augmentation::LastState);
  CHECK(to_string(parse_augmentation("rollout")) == "rollout");
  CHECK_THROWS_AS(parse_augmentation("replay"), ConfigError);
}

TEST_CASE("dataset validation and append") {
  Dataset a(1);
  a.add(Vec::Constant(1, 0.5), 1.0, a.add_anchor(Vec::Zero(1)));
  Dataset b(1);
  b.add(Vec::Constant(1, 0.2), 2.0, b.add_anchor(Vec::Constant(1, 0.1)));
  a.append(b);
  REQUIRE(a.size() == 2);
  CHECK(a.anchor[1] == 1);
  CHECK(a.anchors(0, 1) == doctest::Approx(0.1));
  CHECK_NOTHROW(a.validate());
  a.add(Vec::Zero(1), -1.0);
  CHECK_THROWS_AS(a.validate(), NumericalError);
  Dataset c(1);
  c.add(Vec::Zero(1), std::nan(""));
  CHECK_THROWS_AS(c.validate(), NumericalError);
  CHECK_THROWS_AS(c.add(Vec::Zero(2), 1.0), ContractViolation);
}

TEST_CASE("baselines without any converged ground truth fail loudly") {
  SingleTask dist(std::make_shared<envs::PendulumEnv>());
  ViConfig shape;
  shape.hidden = {8};
  shape.residual_dim = 4;
  BaselineConfig config;
  config.starts = 3;
  config.horizon = 50;
  TargetOptions o = serial();
  o.solver.max_sqp_iterations = 1;
  o.max_drop_fraction = 1.0;
  CHECK_THROWS_AS(train_baselines(dist, shape, config, o), NumericalError);
}
