#include "tvmpc/study/horizon_study.hpp"

#include "tvmpc/core/errors.hpp"

namespace tvmpc {
namespace {

constexpr std::uint64_t kHeldOutStream = 3;
constexpr std::uint64_t kBaselineStream = 4;
constexpr std::uint64_t kStartStream = 5;

std::vector<Task> sample(const TaskDistribution& tasks, int count, Rng& rng) {
  std::vector<Task> out;
  for (int i = 0; i < count; ++i) out.push_back(tasks.sample_task(rng));
  return out;
}

Mat stationary_anchor(const TaskDistribution& tasks, Rng& rng) {
  const StationaryTask st = tasks.sample_stationary_task(rng);
  Mat anchor(tasks.input_dim(), 1);
  anchor.col(0) << st.point.x, st.model->context();
  return anchor;
}

TestStudyRow summarize_row(std::string model, int horizon, const std::vector<MpcTrace>& traces,
                           const std::vector<double>& reference) {
  TestStudyRow row;
  row.model = std::move(model);
  row.horizon = horizon;
  const RolloutSummary s = summarize(traces);
  row.mean_cost = s.mean_cost;
  row.reach_rate = s.reach_rate;
  row.max_violation = s.max_violation;
  double gap = 0.0;
  for (std::size_t i = 0; i < traces.size(); ++i) gap += traces[i].cumulative_cost - reference[i];
  row.mean_gap = traces.empty() ? 0.0 : gap / static_cast<double>(traces.size());
  return row;
}

}  // namespace

double value_mse(const ValueNetwork& net, const Dataset& data) {
  if (data.empty()) return 0.0;
  const Mat r = net.residual().forward_batch(data.inputs);
  double sum = 0.0;
  for (std::size_t j = 0; j < data.size(); ++j) {
    const double v = 0.5 * net.output_scale() * r.col(static_cast<Eigen::Index>(j)).squaredNorm();
    sum += (v - data.targets[j]) * (v - data.targets[j]);
  }
  return sum / static_cast<double>(data.size());
}

HeldOutSet make_held_out(const TaskDistribution& tasks, int count, std::uint64_t seed, const TargetOptions& options,
                         int horizon) {
  Rng rng = make_rng(seed, kHeldOutStream);
  HeldOutSet out;
  const std::vector<Task> candidates = sample(tasks, count, rng);
  const TargetBatch batch = ground_truth_value(candidates, options, horizon);
  out.values = batch.data;
  for (std::size_t s : batch.source) out.tasks.push_back(candidates[s]);
  return out;
}

std::vector<TrainStudyPoint> train_horizon_study(const TaskDistribution& tasks, const ViConfig& base,
                                                 const std::vector<int>& horizons, const Dataset& held_out,
                                                 const std::function<void(const TrainStudyPoint&)>& on_point) {
  require(!horizons.empty(), "train_horizon_study: empty horizon list");
  std::vector<TrainStudyPoint> points;
  for (int horizon : horizons) {
    ViConfig config = base;
    config.horizon = horizon;
    ViHooks hooks;
    hooks.on_iteration = [&](const IterationMetrics& m, const ValueNetwork& net) {
      TrainStudyPoint p{horizon, m.iteration, value_mse(net, held_out), m.bellman_residual};
      points.push_back(p);
      if (on_point) on_point(p);
    };
    value_iteration(tasks, config, hooks);
  }
  return points;
}

Baselines train_baselines(const TaskDistribution& tasks, const ViConfig& shape, const BaselineConfig& config,
                          const TargetOptions& options) {
  Rng rng = make_rng(shape.seed, kBaselineStream);
  const std::vector<Task> starts = sample(tasks, config.starts, rng);
  const GroundTruthData gt = ground_truth_trajectories(starts, options, config.prefix, config.horizon);
  if (gt.values.size() == 0) throw NumericalError("train_baselines: no ground-truth solve converged");
  const Mat anchor = stationary_anchor(tasks, rng);

  Baselines out;
  out.stats = gt.stats;
  const ValueNetwork init = initial_value_network(tasks, shape);
  out.supervised = train_supervised_value(gt.values, init, config.value_fit, shape.alpha, anchor, shape.seed);
  Rng policy_rng = make_rng(shape.seed, kBaselineStream + 100);
  const PolicyNetwork policy = PolicyNetwork::random(tasks.state_dim(), tasks.context_dim(), config.policy_hidden,
                                                     tasks.control_dim(), tasks.input_normalization(), policy_rng);
  out.policy = train_policy(gt.policy, policy, config.policy_fit, shape.seed);
  return out;
}

std::vector<TestStudyRow> test_horizon_study(const TaskDistribution& tasks, const ValueNetwork& vi_net,
                                             const ValueNetwork& supervised, const PolicyNetwork& policy,
                                             const TestStudyConfig& config) {
  Rng rng = make_rng(config.seed, kStartStream);
  const std::vector<Task> candidates = sample(tasks, config.rollouts, rng);

  TargetOptions options;
  options.solver = SolverConfig::offline();
  options.workers = config.workers;
  const TargetBatch reference_batch = ground_truth_value(candidates, options, config.reference_horizon + config.steps);
  std::vector<Task> starts;
  std::vector<double> reference;
  for (std::size_t j = 0; j < reference_batch.solutions.size(); ++j) {
    starts.push_back(candidates[reference_batch.source[j]]);
    const auto& costs = reference_batch.solutions[j].stage_costs;
    double total = 0.0;
    for (int k = 0; k < config.steps; ++k) total += costs[static_cast<std::size_t>(k)];
    reference.push_back(total);
  }
  if (starts.empty()) throw NumericalError("test_horizon_study: no reference solve converged");

  const RolloutConfig rollout{config.steps, config.reach_threshold};
  std::vector<TestStudyRow> rows;
  auto policy_ptr = std::make_shared<const PolicyNetwork>(policy);
  const auto policy_traces = batch_rollouts(
      starts, [&](const Task& t) { return std::make_unique<PolicyController>(policy_ptr, t.model->context()); },
      rollout, config.workers);
  rows.push_back(summarize_row("policy", 0, policy_traces, reference));

  const std::pair<std::string, const ValueNetwork*> models[] = {{"vi", &vi_net}, {"supervised", &supervised}};
  for (const auto& [name, net] : models) {
    auto shared = std::make_shared<const ValueNetwork>(*net);
    for (int horizon : config.horizons) {
      const MpcConfig mpc{horizon, config.solver};
      const auto traces = batch_rollouts(
          starts, [&](const Task& t) { return std::make_unique<MpcController>(t.model, terminal_for(shared, t), mpc); },
          rollout, config.workers);
      rows.push_back(summarize_row(name, horizon, traces, reference));
    }
  }
  return rows;
}

}  // namespace tvmpc
