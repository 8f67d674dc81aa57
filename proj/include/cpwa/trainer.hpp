#pragma once

#include <functional>
#include <map>
#include <optional>
#include <random>
#include <string>

#include "cpwa/kernel.hpp"
#include "cpwa/projection.hpp"

namespace cpwa {

/// State-action stage cost c(x, u) plus the empirical rollout settings used
/// to estimate the training objective.
struct CostFunctional {
  std::function<double(const Vec&, const Vec&)> cost;
  int rollout_steps = 5;
};

struct TrainConfig {
  int max_iter = 4;           // outer gradient/projection alternations
  int episodes = 200;         // per gradient phase
  int transfer_episodes = 80; // fine-tuning budget for runtime transfer
  double learning_rate = 1e-2;
  double noise_scale = 0.1;   // exploration std (action units)
  double w1 = 1.0;            // stage-cost weight in the reward
  double w2 = 1.0;            // tracking weight toward the partition center law
  std::uint64_t seed = 0;     // mandatory; all randomness derives from it
  int hidden_layers = 1;
  int hidden_neurons = 6;
  double init_range = 0.1;    // uniform weight initialization half-width
};

struct LibraryKey {
  long q = 0;
  int P = 0;
  bool operator<(const LibraryKey& o) const {
    return q != o.q ? q < o.q : P < o.P;
  }
  bool operator==(const LibraryKey& o) const { return q == o.q && P == o.P; }
};

struct LibraryEntry {
  ReluNet net;
  int episodes = 0;
  double mean_reward = 0.0;
  double projection_objective = 0.0;
};

/// Library of per-(cell, partition) networks, bound to its grids by hash.
struct NnLibrary {
  std::uint64_t state_grid_hash = 0;
  std::uint64_t controller_grid_hash = 0;
  std::map<LibraryKey, LibraryEntry> entries;

  std::string to_json() const;
  static NnLibrary from_json(const std::string& text);
};

ReluNet init_net(int n, int m, const TrainConfig& cfg, std::mt19937_64& rng);

/// One stochastic policy-gradient phase maximizing
/// r(x,u) = -w1 c(x,u) - w2 |u - kappa(x)| with kappa the partition-center
/// law, episodes rolled out from uniform starts in q through the nominal
/// simulator. Deterministic given the rng state.
ReluNet gradient_phase(const ReluNet& net, const Box& q,
                       const ControllerGrid& controller_grid, int P,
                       const NominalDynamics& nominal,
                       const CostFunctional& cost, const TrainConfig& cfg,
                       std::mt19937_64& rng, double* mean_reward = nullptr);

/// Alternate gradient phases with output-layer projection; the returned net
/// is membership-certified for (q, partition P).
LibraryEntry formal_train(const Box& q, const ControllerGrid& controller_grid,
                          int P, const NominalDynamics& nominal,
                          const CostFunctional& cost, const TrainConfig& cfg,
                          std::uint64_t item_seed);

/// One net per (cell, partition), trained in parallel with derived seeds.
NnLibrary train_library(const StateGrid& state_grid,
                        const ControllerGrid& controller_grid,
                        const NominalDynamics& nominal,
                        const CostFunctional& cost, const TrainConfig& cfg);

/// Family box of controller partition P (its cell in the controller grid).
Box partition_box(const ControllerGrid& grid, int P);

}  // namespace cpwa
