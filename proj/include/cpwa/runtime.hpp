#pragma once

#include <functional>
#include <optional>
#include <random>

#include "cpwa/symbolic.hpp"
#include "cpwa/trainer.hpp"

namespace cpwa {

/// Next-state sampler used in closed loop: stochastic kernels and
/// deterministic simulators both fit.
using StepFunction = std::function<Vec(const Vec&, const Vec&, std::mt19937_64&)>;

StepFunction make_step(const StochasticKernel& kernel);
StepFunction make_step(const NominalDynamics& nominal);

/// Time-indexed library selection produced by DP plus everything needed to
/// execute it against concrete states.
struct ComposedPlanner {
  const NnLibrary* library = nullptr;
  const StateGrid* state_grid = nullptr;
  const Dfa* dfa = nullptr;
  const Workspace* workspace = nullptr;
  std::vector<std::vector<int>> actions;  // actions[k][(q,s) product index]
  int horizon = 0;

  int n_dfa() const { return dfa->num_states(); }
  long product_index(long q, int s) const { return q * n_dfa() + s; }
};

struct TrajectoryStep {
  int k = 0;
  Vec x;
  Vec u;      // empty on the final record
  long q = 0;
  int s = 0;
};

struct Trajectory {
  enum class Status { Accepted, Trap, HorizonExhausted, LeftDomain };
  std::vector<TrajectoryStep> steps;
  Status status = Status::HorizonExhausted;

  /// Concrete labels of the visited states, one letter per step.
  Word labels(const Workspace& ws) const;
};

/// DFA states from which the accepting set is unreachable.
std::vector<char> dfa_dead_states(const Dfa& dfa);

Trajectory run_closed_loop(const ComposedPlanner& planner,
                           const StepFunction& step, const Vec& x0,
                           std::mt19937_64& rng);

struct McResult {
  double estimate = 0.0;
  double ci_lo = 0.0, ci_hi = 1.0;  // Wilson 95%
  long accepted = 0, trials = 0;
};

McResult mc_satisfaction(const ComposedPlanner& planner,
                         const StepFunction& step, const Vec& x0, long trials,
                         std::uint64_t seed);

/// alpha1 |ct(q1) - ct(q2)| + alpha2 |ct(P1) - ct(P2)|_max.
double nn_distance(const StateGrid& state_grid,
                   const ControllerGrid& controller_grid, const LibraryKey& a,
                   const LibraryKey& b, double alpha1, double alpha2);

/// One planning task bundled for the transfer pipeline.
struct PlanTask {
  const StateGrid* state_grid = nullptr;
  const ControllerGrid* controller_grid = nullptr;
  const StochasticKernel* kernel = nullptr;
  const Dfa* dfa = nullptr;
  const Workspace* workspace = nullptr;
  std::vector<long> initial_cells;
  int horizon = 0;
};

/// Library keys referenced by any DP action at any product state.
std::vector<LibraryKey> referenced_keys(const DpResult& dp, long n_abstract,
                                        int n_dfa, int n_partitions);

/// Plan each task, then formally train exactly the referenced (q, P) pairs,
/// deduplicated across tasks.
NnLibrary train_transfer(const std::vector<PlanTask>& tasks,
                         const NominalDynamics& nominal,
                         const CostFunctional& cost, const TrainConfig& cfg);

struct TransferRunResult {
  Trajectory trajectory;
  int nets_trained = 0;
};

/// Closed-loop run that fills library gaps on demand: the nearest stored net
/// (by nn_distance) seeds a short fine-tuning phase plus projection.
TransferRunResult runtime_transfer(const ComposedPlanner& planner,
                                   const ControllerGrid& controller_grid,
                                   NnLibrary& library, const StepFunction& step,
                                   const NominalDynamics& nominal,
                                   const CostFunctional& cost,
                                   const TrainConfig& cfg, const Vec& x0,
                                   std::mt19937_64& rng);

struct DemoSet {
  /// Expert trajectories as (x, u) pairs, flattened.
  std::vector<std::pair<Vec, Vec>> samples;
};

/// Behavior-cloning regression of the demo actions with the library net
/// architecture (seeded gradient descent on the mean squared error).
ReluNet clone_behavior(const DemoSet& demos, int n, int m,
                       const TrainConfig& cfg);

/// Abstraction restricted per cell to the I partitions whose center law best
/// matches the cloned policy at the cell center (ties by index); unkept rows
/// are marked absent.
SymbolicMdp build_mdp_from_demos(const StateGrid& state_grid,
                                 const ControllerGrid& controller_grid,
                                 const StochasticKernel& kernel,
                                 const DemoSet& demos, int I,
                                 const TrainConfig& cfg);

struct AdaptResult {
  StateGrid state_grid;
  ControllerGrid controller_grid;
  DpResult dp;
  std::vector<Letter> labels;
  NnLibrary library;
  double achieved_value = 0.0;
  int refinements = 0;
  bool achieved = false;
  int final_I = 0;
};

/// Refinement loop: build grids, demo-guided abstraction, DP; while the
/// worst initial value is below p, halve both grid widths and double I, up
/// to `max_rounds` refinements; finally train the referenced nets.
AdaptResult adapt_partition(const Box& state_domain, const Vec& eta_q,
                            const Box& controller_domain, const Vec& eta_P,
                            const StochasticKernel& kernel, const Dfa& dfa,
                            const Workspace& ws,
                            const std::vector<Vec>& initial_points, int horizon,
                            const DemoSet& demos, int I, double p,
                            const NominalDynamics& nominal,
                            const CostFunctional& cost, const TrainConfig& cfg,
                            int max_rounds = 4, bool train_nets = true);

}  // namespace cpwa
