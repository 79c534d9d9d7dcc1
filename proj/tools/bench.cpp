// Command-line front end: train, eval and horizon-study.

#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "tvmpc/core/errors.hpp"
#include "tvmpc/io/csv.hpp"
#include "tvmpc/io/manifest.hpp"
#include "tvmpc/io/run_config.hpp"
#include "tvmpc/net/checkpoint.hpp"
#include "tvmpc/study/horizon_study.hpp"
#include "tvmpc/train/parallel.hpp"

namespace fs = std::filesystem;
using namespace tvmpc;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitNumerical = 3;
constexpr std::uint64_t kEvalStream = 6;

struct CommonOptions {
  std::string env;
  std::string config_file;
  std::uint64_t seed = 0;
  int workers = 0;
  std::string out = "out";
  std::optional<int> iters, horizon, samples;
  std::optional<double> alpha;
};

void add_common(CLI::App& cmd, CommonOptions& o) {
  cmd.add_option("--env", o.env, "lqr1d, pendulum, point, point_free or point_cond")
      ->required()
      ->check(CLI::IsMember(env_names()));
  cmd.add_option("--config", o.config_file, "JSON config overriding the environment preset")->check(CLI::ExistingFile);
  cmd.add_option("--seed", o.seed, "Random seed");
  cmd.add_option("--workers", o.workers, "Worker threads (0 = all logical cores)");
  cmd.add_option("--out", o.out, "Output directory");
  cmd.add_option("--iters", o.iters, "Value iterations");
  cmd.add_option("--horizon", o.horizon, "Training horizon (train) or MPC horizon (eval)");
  cmd.add_option("--samples", o.samples, "States sampled per value iteration");
  cmd.add_option("--alpha", o.alpha, "Stationary penalty weight");
}

RunConfig resolve(const CommonOptions& o, bool horizon_is_mpc) {
  RunConfig config = preset(o.env);
  if (!o.config_file.empty()) apply_config_file(config, o.config_file);
  if (o.iters) config.vi.iterations = *o.iters;
  if (o.samples) config.vi.samples = *o.samples;
  if (o.alpha) config.vi.alpha = *o.alpha;
  if (o.horizon) (horizon_is_mpc ? config.mpc.horizon : config.vi.horizon) = *o.horizon;
  config.vi.seed = o.seed;
  config.vi.workers = resolve_workers(o.workers);
  config.validate();
  return config;
}

RunManifest start_run(const std::string& command, const CommonOptions& o, const RunConfig& config,
                      nlohmann::json extra = nlohmann::json::object()) {
  RunManifest m;
  m.command = command;
  m.env = o.env;
  m.config = to_json(config);
  for (auto& [key, value] : extra.items()) m.config["run"][key] = value;
  m.seed = o.seed;
  m.out_dir = o.out;
  m.workers = config.vi.workers;
  m.write();
  return m;
}

void write_summary(const fs::path& dir, const nlohmann::json& summary) {
  std::ofstream out(dir / "summary.json");
  out << summary.dump(2) << '\n';
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int cmd_train(const CommonOptions& o) {
  const RunConfig config = resolve(o, false);
  const RunManifest manifest = start_run("train", o, config);
  const fs::path out(o.out);
  const auto tasks = make_tasks(config);
  const auto t0 = std::chrono::steady_clock::now();

  fs::create_directories(out / "checkpoints");
  CsvWriter metrics((out / "metrics.csv").string(),
                    {"iteration", "dataset_size", "attempted", "dropped", "bellman_residual", "fit_loss", "anchor_value",
                     "mean_sqp_iterations"});
  ViHooks hooks;
  hooks.on_iteration = [&](const IterationMetrics& m, const ValueNetwork&) {
    metrics.row({m.iteration, m.dataset_size, m.attempted, m.dropped, m.bellman_residual, m.fit_loss, m.anchor_value,
                 m.mean_sqp_iterations});
  };
  hooks.on_checkpoint = [&](int k, const ValueNetwork& net) {
    char name[32];
    std::snprintf(name, sizeof(name), "iter_%05d.ckpt", k);
    save_checkpoint(net, out / "checkpoints" / name);
  };
  try {
    const ViResult result = value_iteration(*tasks, config.vi, hooks);
    metrics.close(manifest.hash());
    save_checkpoint(result.net, out / "value.ckpt");
    double iteration_seconds = 0.0;
    for (const auto& m : result.metrics) iteration_seconds += m.seconds;
    write_summary(out, {{"command", "train"},
                        {"env", o.env},
                        {"iterations", result.metrics.size()},
                        {"final_bellman_residual", result.metrics.back().bellman_residual},
                        {"final_anchor_value", result.metrics.back().anchor_value},
                        {"iteration_seconds", iteration_seconds},
                        {"wall_seconds", seconds_since(t0)},
                        {"checkpoint", (out / "value.ckpt").string()},
                        {"manifest_hash", manifest.hash()}});
    std::cout << "trained " << o.env << " for " << result.metrics.size() << " iterations in " << seconds_since(t0)
              << " s; checkpoint " << (out / "value.ckpt").string() << '\n';
  } catch (const NumericalError& e) {
    metrics.close(manifest.hash());
    std::ofstream(out / "diagnostics.txt") << e.what() << '\n';
    throw;
  }
  return 0;
}

std::shared_ptr<const ValueNetwork> load_value(const std::string& path, const TaskDistribution& tasks) {
  if (path.empty() || path == "none") return nullptr;
  return std::make_shared<const ValueNetwork>(load_checkpoint(path, tasks.state_dim(), tasks.context_dim()));
}

int cmd_eval(const CommonOptions& o, const std::string& checkpoint, std::optional<int> rollouts,
             std::optional<int> steps) {
  RunConfig config = resolve(o, true);
  if (rollouts) config.eval_rollouts = *rollouts;
  if (steps) config.rollout.steps = *steps;
  config.validate();
  const auto tasks = make_tasks(config);
  const auto net = load_value(checkpoint, *tasks);
  const RunManifest manifest = start_run("eval", o, config, {{"checkpoint", checkpoint}});
  const fs::path out(o.out);
  const auto t0 = std::chrono::steady_clock::now();

  Rng rng = make_rng(o.seed, kEvalStream);
  std::vector<Task> starts;
  for (int i = 0; i < config.eval_rollouts; ++i) starts.push_back(tasks->sample_task(rng));
  const MpcConfig mpc = config.mpc;
  const auto traces = batch_rollouts(
      starts, [&](const Task& t) { return std::make_unique<MpcController>(t.model, terminal_for(net, t), mpc); },
      config.rollout, config.vi.workers);

  std::vector<std::string> columns{"rollout", "step"};
  for (int i = 0; i < tasks->state_dim(); ++i) columns.push_back("x" + std::to_string(i));
  for (int i = 0; i < tasks->control_dim(); ++i) columns.push_back("u" + std::to_string(i));
  for (const char* c : {"running_cost", "violation", "iterations", "degraded"}) columns.push_back(c);
  CsvWriter trace_csv((out / "traces.csv").string(), columns);
  for (std::size_t r = 0; r < traces.size(); ++r) {
    const MpcTrace& t = traces[r];
    for (int k = 0; k < t.steps(); ++k) {
      std::vector<CsvWriter::Cell> row{r, k};
      for (double v : t.states[static_cast<std::size_t>(k)]) row.emplace_back(v);
      for (double v : t.controls[static_cast<std::size_t>(k)]) row.emplace_back(v);
      row.emplace_back(t.running_costs[static_cast<std::size_t>(k)]);
      row.emplace_back(t.violations[static_cast<std::size_t>(k)]);
      row.emplace_back(t.iterations[static_cast<std::size_t>(k)]);
      row.emplace_back(static_cast<bool>(t.degraded[static_cast<std::size_t>(k)]));
      trace_csv.row(row);
    }
  }
  trace_csv.close(manifest.hash());

  CsvWriter per_rollout((out / "rollouts.csv").string(),
                        {"rollout", "cumulative_cost", "reached", "first_reach_step", "max_violation", "degraded_steps",
                         "infeasible_start"});
  for (std::size_t r = 0; r < traces.size(); ++r) {
    const MpcTrace& t = traces[r];
    per_rollout.row({r, t.cumulative_cost, t.reached, t.first_reach_step, t.max_violation, t.degraded_steps,
                     t.infeasible_start});
  }
  per_rollout.close(manifest.hash());

  const RolloutSummary s = summarize(traces);
  write_summary(out, {{"command", "eval"},
                      {"env", o.env},
                      {"checkpoint", checkpoint},
                      {"horizon", config.mpc.horizon},
                      {"rollouts", s.rollouts},
                      {"mean_cost", s.mean_cost},
                      {"reach_rate", s.reach_rate},
                      {"max_violation", s.max_violation},
                      {"mean_solve_seconds", s.mean_solve_seconds},
                      {"degraded_steps", s.degraded_steps},
                      {"infeasible_starts", s.infeasible_starts},
                      {"wall_seconds", seconds_since(t0)},
                      {"manifest_hash", manifest.hash()}});
  std::cout << "rollouts " << s.rollouts << " mean cost " << s.mean_cost << " reach rate " << s.reach_rate
            << " max violation " << s.max_violation << '\n';
  return 0;
}

int cmd_horizon_study(const CommonOptions& o, const std::string& mode, const std::vector<int>& horizons,
                      const std::string& checkpoint, std::optional<int> rollouts, std::optional<int> steps) {
  if (horizons.empty()) throw CLI::ValidationError("--horizons", "at least one horizon is required");
  RunConfig config = resolve(o, false);
  const auto tasks = make_tasks(config);
  const fs::path out(o.out);
  const auto t0 = std::chrono::steady_clock::now();
  TargetOptions options;
  options.workers = config.vi.workers;

  if (mode == "train") {
    const RunManifest manifest = start_run("horizon-study", o, config, {{"mode", mode}, {"horizons", horizons}});
    const HeldOutSet held_out = make_held_out(*tasks, 200, o.seed, options);
    CsvWriter csv((out / "study.csv").string(), {"horizon", "iteration", "mse", "bellman_residual"});
    const auto points = train_horizon_study(*tasks, config.vi, horizons, held_out.values, [&](const TrainStudyPoint& p) {
      csv.row({p.horizon, p.iteration, p.mse, p.bellman_residual});
    });
    csv.close(manifest.hash());
    nlohmann::json final_mse = nlohmann::json::object();
    for (const auto& p : points) final_mse[std::to_string(p.horizon)] = p.mse;
    write_summary(out, {{"command", "horizon-study"},
                        {"mode", mode},
                        {"final_mse", final_mse},
                        {"wall_seconds", seconds_since(t0)},
                        {"manifest_hash", manifest.hash()}});
    return 0;
  }

  if (checkpoint.empty() || checkpoint == "none") {
    throw CLI::ValidationError("--checkpoint", "test mode needs a trained value checkpoint");
  }
  const auto net = load_value(checkpoint, *tasks);
  TestStudyConfig study;
  study.horizons = horizons;
  study.rollouts = rollouts.value_or(config.eval_rollouts);
  study.steps = steps.value_or(config.rollout.steps);
  study.reach_threshold = config.rollout.reach_threshold;
  study.solver = config.mpc.solver;
  study.workers = config.vi.workers;
  study.seed = o.seed;
  const RunManifest manifest = start_run("horizon-study", o, config,
                                         {{"mode", mode},
                                          {"horizons", horizons},
                                          {"checkpoint", checkpoint},
                                          {"rollouts", study.rollouts},
                                          {"steps", study.steps}});
  BaselineConfig baseline;
  baseline.value_fit = config.vi.fit;
  baseline.value_fit.sgd_steps = 20000;
  baseline.policy_fit = config.vi.fit;
  baseline.policy_fit.sgd_steps = 20000;
  const Baselines b = train_baselines(*tasks, config.vi, baseline, options);
  save_checkpoint(b.supervised, out / "supervised.ckpt");
  save_policy(b.policy, out / "policy.ckpt");
  const auto rows = test_horizon_study(*tasks, *net, b.supervised, b.policy, study);
  CsvWriter csv((out / "study.csv").string(),
                {"model", "horizon", "mean_cost", "mean_gap", "reach_rate", "max_violation"});
  for (const auto& r : rows) csv.row({r.model, r.horizon, r.mean_cost, r.mean_gap, r.reach_rate, r.max_violation});
  csv.close(manifest.hash());
  write_summary(out, {{"command", "horizon-study"},
                      {"mode", mode},
                      {"wall_seconds", seconds_since(t0)},
                      {"manifest_hash", manifest.hash()}});
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Value-function MPC workbench"};
  app.require_subcommand(1);

  CommonOptions train_opts;
  auto* train = app.add_subcommand("train", "Fitted value iteration");
  add_common(*train, train_opts);

  CommonOptions eval_opts;
  std::string eval_checkpoint = "none";
  std::optional<int> eval_rollouts, eval_steps;
  auto* eval = app.add_subcommand("eval", "Closed-loop MPC rollouts from random starts");
  add_common(*eval, eval_opts);
  eval->add_option("--checkpoint", eval_checkpoint, "Value checkpoint, or 'none' for no terminal cost");
  eval->add_option("--n-rollouts", eval_rollouts, "Number of rollouts");
  eval->add_option("--steps", eval_steps, "Closed-loop steps per rollout");

  CommonOptions study_opts;
  std::string study_mode;
  std::vector<int> study_horizons;
  std::string study_checkpoint;
  std::optional<int> study_rollouts, study_steps;
  auto* study = app.add_subcommand("horizon-study", "Training- or test-horizon study");
  add_common(*study, study_opts);
  study->add_option("--mode", study_mode, "train or test")->required()->check(CLI::IsMember({"train", "test"}));
  study->add_option("--horizons", study_horizons, "Horizon list, e.g. --horizons 1 10")->delimiter(',');
  study->add_option("--checkpoint", study_checkpoint, "Value checkpoint evaluated in test mode");
  study->add_option("--n-rollouts", study_rollouts, "Rollouts per controller in test mode");
  study->add_option("--steps", study_steps, "Closed-loop steps per rollout in test mode");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*train) return cmd_train(train_opts);
    if (*eval) return cmd_eval(eval_opts, eval_checkpoint, eval_rollouts, eval_steps);
    if (*study) {
      return cmd_horizon_study(study_opts, study_mode, study_horizons, study_checkpoint, study_rollouts, study_steps);
    }
  } catch (const CLI::ValidationError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ConfigError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ContractViolation& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ParseError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  }
  return 0;
}
