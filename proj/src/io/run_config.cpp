#include "tvmpc/io/run_config.hpp"

#include <fstream>
#include <set>

#include "tvmpc/core/errors.hpp"
#include "tvmpc/envs/lqr1d.hpp"

namespace tvmpc {
namespace {

using nlohmann::json;

/// Reads the keys of one JSON section into fields and rejects leftovers.
class SectionReader {
 public:
  SectionReader(const json& doc, std::string name) : name_(std::move(name)) {
    if (doc.contains(name_)) {
      section_ = &doc.at(name_);
      if (!section_->is_object()) throw ConfigError("config: section '" + name_ + "' must be an object");
    }
  }

  template <typename T>
  void operator()(const char* key, T& field) {
    known_.insert(key);
    if (!section_ || !section_->contains(key)) return;
    try {
      read(section_->at(key), field);
    } catch (const json::exception& e) {
      throw ConfigError("config: bad value for '" + name_ + "." + key + "': " + e.what());
    }
  }

  void finish() const {
    if (!section_) return;
    for (const auto& item : section_->items()) {
      if (!known_.count(item.key())) throw ConfigError("config: unknown key '" + name_ + "." + item.key() + "'");
    }
  }

 private:
  template <typename T>
  static void read(const json& j, T& field) {
    field = j.get<T>();
  }
  static void read(const json& j, Augmentation& field) { field = parse_augmentation(j.get<std::string>()); }
  static void read(const json& j, Eigen::Vector2d& field) {
    const auto v = j.get<std::vector<double>>();
    if (v.size() != 2) throw ConfigError("config: expected a pair of numbers");
    field = Eigen::Vector2d(v[0], v[1]);
  }

  std::string name_;
  const json* section_ = nullptr;
  std::set<std::string> known_;
};

class SectionWriter {
 public:
  explicit SectionWriter(json& out) : out_(out) {}

  template <typename T>
  void operator()(const char* key, const T& field) {
    out_[key] = field;
  }
  void operator()(const char* key, const Augmentation& field) { out_[key] = to_string(field); }
  void operator()(const char* key, const Eigen::Vector2d& field) { out_[key] = {field[0], field[1]}; }

 private:
  json& out_;
};

template <typename V, typename C>
void visit_vi(V&& v, C& c) {
  v("iterations", c.iterations);
  v("samples", c.samples);
  v("stationary_samples", c.stationary_samples);
  v("horizon", c.horizon);
  v("alpha", c.alpha);
  v("augmentation", c.augmentation);
  v("rollout_max_steps", c.rollout_max_steps);
  v("reach_threshold", c.reach_threshold);
  v("hidden", c.hidden);
  v("residual_dim", c.residual_dim);
  v("max_drop_fraction", c.max_drop_fraction);
  v("checkpoint_every", c.checkpoint_every);
}

template <typename V, typename C>
void visit_fit(V&& v, C& c) {
  v("learning_rate", c.adam.learning_rate);
  v("beta1", c.adam.beta1);
  v("beta2", c.adam.beta2);
  v("epsilon", c.adam.epsilon);
  v("weight_decay", c.adam.weight_decay);
  v("batch_size", c.batch_size);
  v("sgd_steps", c.sgd_steps);
  v("epochs", c.epochs);
}

template <typename V, typename C>
void visit_solver(V&& v, C& c) {
  v("max_sqp_iterations", c.max_sqp_iterations);
  v("kkt_tolerance", c.kkt_tolerance);
  v("max_qp_iterations", c.max_qp_iterations);
  v("qp_tolerance", c.qp_tolerance);
  v("violation_tolerance", c.violation_tolerance);
  v("dynamics_tolerance", c.dynamics_tolerance);
  v("line_search_factor", c.line_search_factor);
  v("max_backtracks", c.max_backtracks);
  v("armijo", c.armijo);
}

template <typename V, typename C>
void visit_mpc(V&& v, C& c) {
  v("horizon", c.mpc.horizon);
  v("max_sqp_iterations", c.mpc.solver.max_sqp_iterations);
  v("kkt_tolerance", c.mpc.solver.kkt_tolerance);
  v("violation_tolerance", c.mpc.solver.violation_tolerance);
  v("steps", c.rollout.steps);
  v("reach_threshold", c.rollout.reach_threshold);
  v("rollouts", c.eval_rollouts);
}

template <typename V, typename P>
void visit_point(V&& v, P& p) {
  v("dt", p.dt);
  v("control_weight", p.control_weight);
  v("target", p.target);
  v("obstacle_center", p.obstacle.center);
  v("obstacle_half_extents", p.obstacle.half_extents);
  v("obstacle_corner_radius", p.obstacle.corner_radius);
}

template <typename V, typename C>
void visit_env(V&& v, C& c) {
  if (c.env == "pendulum") {
    v("g_over_l", c.pendulum.g_over_l);
    v("dt", c.pendulum.dt);
    v("u_max", c.pendulum.u_max);
    v("velocity_box", c.pendulum.velocity_box);
  } else if (c.env == "point" || c.env == "point_free") {
    visit_point(v, c.point);
  } else if (c.env == "point_cond") {
    visit_point(v, c.conditioned.base);
    v("target_lo", c.conditioned.target_lo);
    v("target_hi", c.conditioned.target_hi);
    v("obstacle_lo", c.conditioned.obstacle_lo);
    v("obstacle_hi", c.conditioned.obstacle_hi);
  }
}

}  // namespace

const std::vector<std::string>& env_names() {
  static const std::vector<std::string> names{"lqr1d", "pendulum", "point", "point_free", "point_cond"};
  return names;
}

RunConfig preset(const std::string& env) {
  RunConfig c;
  c.env = env;
  ViConfig& vi = c.vi;
  if (env == "lqr1d") {
    vi.iterations = 200;
    vi.samples = 200;
    vi.horizon = 1;
    vi.hidden = {32, 32};
    vi.residual_dim = 16;
    vi.fit.sgd_steps = 200;
    c.mpc.horizon = 1;
    c.rollout.steps = 30;
  } else if (env == "pendulum") {
    vi.iterations = 1000;
    vi.samples = 500;
    vi.horizon = 10;
    vi.alpha = 1.0;
    vi.fit.sgd_steps = 80;
    vi.hidden = {64, 64};
    vi.residual_dim = 64;
    c.mpc.horizon = 20;
    c.rollout.steps = 300;
  } else if (env == "point" || env == "point_free") {
    c.point.has_obstacle = env == "point";
    c.point.obstacle.half_extents = {0.1, 0.4};
    vi.iterations = 100;
    vi.samples = 2500;
    vi.horizon = 10;
    vi.alpha = 1.0;
    vi.fit.sgd_steps = 2000;
    vi.augmentation = Augmentation::LastState;
    vi.hidden = {32, 32};
    vi.residual_dim = 32;
    c.mpc.horizon = 10;
    c.rollout.steps = 400;
  } else if (env == "point_cond") {
    vi.iterations = 60;
    vi.samples = 100;
    vi.horizon = 5;
    vi.alpha = 0.01;
    vi.augmentation = Augmentation::Rollout;
    vi.rollout_max_steps = 60;
    vi.fit.adam.learning_rate = 4e-4;
    vi.fit.adam.weight_decay = 1e-5;
    vi.fit.epochs = 16;
    vi.hidden = {64, 64, 64};
    vi.residual_dim = 64;
    c.mpc.horizon = 5;
    c.rollout.steps = 400;
    c.eval_rollouts = 200;
  } else {
    throw ConfigError("unknown environment '" + env + "'");
  }
  return c;
}

void RunConfig::validate() const {
  vi.validate();
  if (mpc.horizon < 1) throw ConfigError("mpc: horizon must be at least 1");
  if (rollout.steps < 0) throw ConfigError("mpc: steps must be nonnegative");
  if (eval_rollouts < 0) throw ConfigError("mpc: rollouts must be nonnegative");
  try {
    mpc.solver.validate();
  } catch (const ContractViolation& e) {
    throw ConfigError(e.what());
  }
  if (!(pendulum.dt > 0.0 && point.dt > 0.0 && conditioned.base.dt > 0.0)) {
    throw ConfigError("env: dt must be positive");
  }
}

void apply_json(RunConfig& config, const nlohmann::json& doc) {
  if (!doc.is_object()) throw ConfigError("config: top level must be an object");
  static const std::set<std::string> sections{"env", "vi", "fit", "solver", "mpc"};
  for (const auto& item : doc.items()) {
    if (!sections.count(item.key())) throw ConfigError("config: unknown section '" + item.key() + "'");
  }
  SectionReader env(doc, "env");
  visit_env(env, config);
  env.finish();
  SectionReader vi(doc, "vi");
  visit_vi(vi, config.vi);
  vi.finish();
  SectionReader fit(doc, "fit");
  visit_fit(fit, config.vi.fit);
  fit.finish();
  SectionReader solver(doc, "solver");
  visit_solver(solver, config.vi.solver);
  solver.finish();
  SectionReader mpc(doc, "mpc");
  visit_mpc(mpc, config);
  mpc.finish();
}

void apply_config_file(RunConfig& config, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config: " + path + ": " + e.what());
  }
  apply_json(config, doc);
}

nlohmann::json to_json(const RunConfig& config) {
  nlohmann::json out = nlohmann::json::object();
  out["env"] = nlohmann::json::object();
  SectionWriter env(out["env"]);
  visit_env(env, config);
  SectionWriter vi(out["vi"]);
  visit_vi(vi, config.vi);
  SectionWriter fit(out["fit"]);
  visit_fit(fit, config.vi.fit);
  SectionWriter solver(out["solver"]);
  visit_solver(solver, config.vi.solver);
  SectionWriter mpc(out["mpc"]);
  visit_mpc(mpc, config);
  return out;
}

std::shared_ptr<const TaskDistribution> make_tasks(const RunConfig& config) {
  if (config.env == "lqr1d") return std::make_shared<SingleTask>(std::make_shared<envs::Lqr1dEnv>());
  if (config.env == "pendulum") return std::make_shared<SingleTask>(std::make_shared<envs::PendulumEnv>(config.pendulum));
  if (config.env == "point" || config.env == "point_free") {
    envs::PointEnv::Params p = config.point;
    p.has_obstacle = config.env == "point";
    return std::make_shared<SingleTask>(std::make_shared<envs::PointEnv>(p));
  }
  if (config.env == "point_cond") return std::make_shared<envs::ConditionedPointTasks>(config.conditioned);
  throw ConfigError("unknown environment '" + config.env + "'");
}

}  // namespace tvmpc
