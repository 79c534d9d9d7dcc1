#pragma once

#include <memory>
#include <string>
#include <vector>

#include "tvmpc/core/types.hpp"

namespace tvmpc {

/// First and Gauss-Newton second derivatives of a stage cost. `lux` is nu x nx.
struct CostDerivatives {
  Vec lx, lu;
  Mat lxx, luu, lux;
};

/// A point of the stationary set: l(x,u) = 0, x = f(x,u), c(x,u) >= 0.
struct StationaryPoint {
  StateVec x;
  ControlVec u;
};

/// Map applied to the network input: z = (in - offset) / scale. A component
/// flagged `periodic` becomes the pair (sin(in - offset), cos(in - offset)) instead,
/// so the features are smooth across the wrap point.
struct InputNormalization {
  Vec offset;
  Vec scale;
  std::vector<bool> periodic;

  static InputNormalization identity(std::size_t dim);
  std::size_t dim() const { return static_cast<std::size_t>(offset.size()); }
  /// Number of features after the map.
  std::size_t feature_dim() const;
};

/// Discrete-time constrained optimal control model.
///
/// Implementations are immutable after construction, so a single instance can be
/// shared by any number of solver workers. Derivative hooks default to central
/// finite differences (step 1e-6); concrete environments override them with
/// analytic expressions.
class EnvModel {
 public:
  virtual ~EnvModel() = default;

  virtual std::string name() const = 0;
  virtual int nx() const = 0;
  virtual int nu() const = 0;
  virtual int nc() const { return 0; }
  virtual int n_omega() const { return 0; }
  virtual double dt() const = 0;

  virtual StateVec dynamics(const StateVec& x, const ControlVec& u) const = 0;
  /// Nonnegative running cost.
  virtual double stage_cost(const StateVec& x, const ControlVec& u) const = 0;
  /// Path constraint, feasible iff every entry is >= 0.
  virtual Vec constraint(const StateVec& x, const ControlVec& u) const;
  /// Analytic description of the feasible set Omega (empty = whole state space).
  virtual Vec omega_constraint(const StateVec& x) const;

  virtual void dynamics_jacobians(const StateVec& x, const ControlVec& u, Mat& A, Mat& B) const;
  virtual void cost_derivatives(const StateVec& x, const ControlVec& u, CostDerivatives& out) const;
  virtual void constraint_jacobians(const StateVec& x, const ControlVec& u, Mat& cx, Mat& cu) const;
  virtual Mat omega_jacobian(const StateVec& x) const;

  virtual StateVec sample_state(Rng& rng) const = 0;
  virtual StationaryPoint sample_stationary(Rng& rng) const = 0;

  /// Conditioning vector appended to the value-network input (empty for plain envs).
  virtual Vec context() const { return {}; }
  virtual InputNormalization state_normalization() const { return InputNormalization::identity(nx()); }

  bool omega_is_trivial() const { return n_omega() == 0; }
};

/// A state drawn together with the model instance it belongs to. Plain environments
/// always return the same instance; conditioned ones draw a fresh target/obstacle.
struct Task {
  std::shared_ptr<const EnvModel> model;
  StateVec x;
};

struct StationaryTask {
  std::shared_ptr<const EnvModel> model;
  StationaryPoint point;
};

/// Distribution over (model instance, state) pairs used for training and evaluation.
class TaskDistribution {
 public:
  virtual ~TaskDistribution() = default;

  virtual std::string name() const = 0;
  virtual int state_dim() const = 0;
  virtual int control_dim() const = 0;
  virtual int context_dim() const { return 0; }
  int input_dim() const { return state_dim() + context_dim(); }

  virtual Task sample_task(Rng& rng) const = 0;
  virtual StationaryTask sample_stationary_task(Rng& rng) const = 0;
  /// Normalization for the full network input (state followed by context).
  virtual InputNormalization input_normalization() const = 0;
  /// Output scale of value networks: they fit dt * V, the value in integrated-cost units.
  virtual double value_scale() const = 0;
};

/// Wraps a single fixed model as a task distribution.
class SingleTask final : public TaskDistribution {
 public:
  explicit SingleTask(std::shared_ptr<const EnvModel> model);

  std::string name() const override { return model_->name(); }
  int state_dim() const override { return model_->nx(); }
  int control_dim() const override { return model_->nu(); }
  Task sample_task(Rng& rng) const override { return {model_, model_->sample_state(rng)}; }
  StationaryTask sample_stationary_task(Rng& rng) const override {
    return {model_, model_->sample_stationary(rng)};
  }
  InputNormalization input_normalization() const override { return model_->state_normalization(); }
  double value_scale() const override { return 1.0 / model_->dt(); }

  const std::shared_ptr<const EnvModel>& model() const { return model_; }

 private:
  std::shared_ptr<const EnvModel> model_;
};

}  // namespace tvmpc
