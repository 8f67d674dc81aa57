#pragma once

#include <string>
#include <vector>

#include "cpwa/dynamics.hpp"
#include "cpwa/ltl.hpp"
#include "cpwa/trainer.hpp"

namespace cpwa {

/// Full task description loaded from JSON: dynamics, kernel, grids, spec,
/// workspace, initial set, horizon, seeds, training preset.
struct TaskConfig {
  std::string dynamics = "dubins";  // dubins | integrator-chain
  DubinsParams dubins;
  Mat integrator_B;  // integrator-chain coupling

  double variance_floor = 1e-6;

  Box state_domain;
  Vec eta_q;
  Box controller_domain;
  Vec eta_P;

  std::string spec_text;
  Workspace workspace;
  std::vector<Vec> initial_points;
  int horizon = 1;
  TrainConfig train;

  NominalDynamics make_dynamics() const;
  StochasticKernel make_kernel() const;
  StateGrid make_state_grid() const;
  ControllerGrid make_controller_grid() const;
  FormulaPtr parse_spec() const;

  /// Cross-field validation; throws ConfigError with the offending field.
  void validate() const;

  static TaskConfig from_json(const std::string& text);
  std::string to_json() const;
};

TaskConfig load_task_file(const std::string& path);

}  // namespace cpwa
