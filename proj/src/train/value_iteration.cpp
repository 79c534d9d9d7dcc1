#include "tvmpc/train/value_iteration.hpp"

#include <chrono>
#include <cmath>

namespace tvmpc {
namespace {

constexpr std::uint64_t kInitStream = 1;
constexpr std::uint64_t kSampleStream = 2;

std::vector<Task> sample_tasks(const TaskDistribution& tasks, int count, Rng& rng) {
  std::vector<Task> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) out.push_back(tasks.sample_task(rng));
  return out;
}

Vec stationary_input(const StationaryTask& st) {
  const Vec ctx = st.model->context();
  Vec in(st.point.x.size() + ctx.size());
  in << st.point.x, ctx;
  return in;
}

/// Anchors each record at the stationary point of its own task instance.
void attach_task_anchors(TargetBatch& batch, const std::vector<Task>& tasks, Rng& rng) {
  std::vector<int> anchor_of(tasks.size(), -1);
  for (std::size_t j = 0; j < batch.source.size(); ++j) {
    const std::size_t t = batch.source[j];
    if (anchor_of[t] < 0) {
      anchor_of[t] = batch.data.add_anchor(stationary_input({tasks[t].model, tasks[t].model->sample_stationary(rng)}));
    }
    batch.data.anchor[j] = anchor_of[t];
  }
}

double mean_abs_error(const ValueNetwork* net, const Dataset& data) {
  if (data.empty()) return 0.0;
  double sum = 0.0;
  const Mat pred = net ? net->residual().forward_batch(data.inputs) : Mat::Zero(1, data.inputs.cols());
  for (std::size_t j = 0; j < data.size(); ++j) {
    const double v = net ? 0.5 * net->output_scale() * pred.col(static_cast<Eigen::Index>(j)).squaredNorm() : 0.0;
    sum += std::abs(v - data.targets[j]);
  }
  return sum / static_cast<double>(data.size());
}

double value_of_input(const ValueNetwork& net, const Vec& input) {
  return 0.5 * net.output_scale() * net.residual().forward(input).squaredNorm();
}

}  // namespace

std::string to_string(Augmentation mode) {
  switch (mode) {
    case Augmentation::None: return "none";
    case Augmentation::LastState: return "last_state";
    case Augmentation::Rollout: return "rollout";
  }
  return "unknown";
}

Augmentation parse_augmentation(const std::string& name) {
  if (name == "none") return Augmentation::None;
  if (name == "last_state") return Augmentation::LastState;
  if (name == "rollout") return Augmentation::Rollout;
  throw ConfigError("unknown augmentation '" + name + "' (expected none, last_state or rollout)");
}

void ViConfig::validate() const {
  if (iterations < 1) throw ConfigError("vi: iterations must be at least 1");
  if (samples < 1) throw ConfigError("vi: samples must be at least 1");
  if (stationary_samples < 0) throw ConfigError("vi: stationary_samples must be nonnegative");
  if (horizon < 1) throw ConfigError("vi: horizon must be at least 1");
  if (!(alpha >= 0.0)) throw ConfigError("vi: alpha must be nonnegative");
  if (rollout_max_steps < 1) throw ConfigError("vi: rollout_max_steps must be at least 1");
  if (residual_dim < 1) throw ConfigError("vi: residual_dim must be at least 1");
  for (int h : hidden)
    if (h < 1) throw ConfigError("vi: hidden widths must be positive");
  if (!(max_drop_fraction >= 0.0 && max_drop_fraction <= 1.0)) {
    throw ConfigError("vi: max_drop_fraction must lie in [0, 1]");
  }
  if (checkpoint_every < 0) throw ConfigError("vi: checkpoint_every must be nonnegative");
  fit.validate();
  try {
    solver.validate();
  } catch (const ContractViolation& e) {
    throw ConfigError(e.what());
  }
}

ValueNetwork initial_value_network(const TaskDistribution& tasks, const ViConfig& config) {
  Rng rng = make_rng(config.seed, kInitStream);
  return ValueNetwork::random(tasks.state_dim(), tasks.context_dim(), config.hidden, config.residual_dim,
                              tasks.input_normalization(), rng, tasks.value_scale());
}

ViResult value_iteration(const TaskDistribution& tasks, const ViConfig& config, const ViHooks& hooks) {
  config.validate();
  ViResult result;
  result.net = initial_value_network(tasks, config);
  ValueFitter fitter(result.net.residual().num_params(), config.fit, config.seed);
  Rng rng = make_rng(config.seed, kSampleStream);
  const bool conditioned = tasks.context_dim() > 0;

  TargetOptions options;
  options.solver = config.solver;
  options.workers = config.workers;
  options.max_drop_fraction = config.max_drop_fraction;
  const RolloutOptions rollout{config.rollout_max_steps, config.reach_threshold};

  std::shared_ptr<const ValueNetwork> frozen;  // null: V_1 = 0
  for (int k = 1; k <= config.iterations; ++k) {
    const auto start = std::chrono::steady_clock::now();
    const std::vector<Task> starts = sample_tasks(tasks, config.samples, rng);

    TargetBatch batch;
    if (config.augmentation == Augmentation::Rollout) {
      batch = collect_rollout_data(starts, frozen, config.horizon, options, rollout);
    } else {
      batch = bellman_targets(starts, frozen, config.horizon, options);
    }
    std::vector<Task> record_tasks = starts;
    if (config.augmentation == Augmentation::LastState) {
      std::vector<Task> ends;
      ends.reserve(batch.solutions.size());
      for (std::size_t j = 0; j < batch.solutions.size(); ++j) {
        ends.push_back({starts[batch.source[j]].model, batch.solutions[j].states.back()});
      }
      TargetBatch extra = bellman_targets(ends, frozen, config.horizon, options);
      const std::size_t offset = record_tasks.size();
      record_tasks.insert(record_tasks.end(), ends.begin(), ends.end());
      for (auto& s : extra.source) s += offset;
      batch.data.append(extra.data);
      batch.source.insert(batch.source.end(), extra.source.begin(), extra.source.end());
      batch.stats += extra.stats;
    }

    Mat global_anchors(tasks.input_dim(), 0);
    if (conditioned) {
      attach_task_anchors(batch, record_tasks, rng);
    } else {
      global_anchors.resize(tasks.input_dim(), config.stationary_samples);
      for (int s = 0; s < config.stationary_samples; ++s) {
        global_anchors.col(s) = stationary_input(tasks.sample_stationary_task(rng));
      }
    }

    IterationMetrics m;
    m.iteration = k;
    m.dataset_size = batch.data.size();
    m.attempted = batch.stats.attempted;
    m.dropped = batch.stats.dropped;
    m.mean_sqp_iterations = batch.stats.mean_sqp_iterations();
    m.bellman_residual = mean_abs_error(frozen.get(), batch.data);

    const FitStats fit = fitter.fit(result.net, batch.data, global_anchors, config.alpha);
    if (!std::isfinite(fit.mean_loss)) throw NumericalError("value iteration: non-finite loss at iteration " + std::to_string(k));
    m.fit_loss = fit.final_loss;

    double anchor_value = 0.0;
    for (Eigen::Index a = 0; a < global_anchors.cols(); ++a) {
      anchor_value = std::max(anchor_value, value_of_input(result.net, global_anchors.col(a)));
    }
    for (Eigen::Index a = 0; a < batch.data.anchors.cols(); ++a) {
      anchor_value = std::max(anchor_value, value_of_input(result.net, batch.data.anchors.col(a)));
    }
    m.anchor_value = anchor_value;
    m.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    frozen = std::make_shared<const ValueNetwork>(result.net);
    result.metrics.push_back(m);
    if (hooks.on_iteration) hooks.on_iteration(m, result.net);
    const bool periodic = config.checkpoint_every > 0 && k % config.checkpoint_every == 0;
    if (hooks.on_checkpoint && (periodic || k == config.iterations)) hooks.on_checkpoint(k, result.net);
  }
  return result;
}

}  // namespace tvmpc
