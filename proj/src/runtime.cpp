#include "cpwa/runtime.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "cpwa/parallel.hpp"

namespace cpwa {

StepFunction make_step(const StochasticKernel& kernel) {
  return [&kernel](const Vec& x, const Vec& u, std::mt19937_64& rng) {
    return kernel.sample_next(x, u, rng);
  };
}

StepFunction make_step(const NominalDynamics& nominal) {
  return [&nominal](const Vec& x, const Vec& u, std::mt19937_64&) {
    return nominal(x, u);
  };
}

Word Trajectory::labels(const Workspace& ws) const {
  Word w;
  w.reserve(steps.size());
  for (const auto& st : steps) w.push_back(ws.label_state(st.x));
  return w;
}

std::vector<char> dfa_dead_states(const Dfa& dfa) {
  const int Z = dfa.num_states();
  std::vector<char> alive(Z, 0);
  for (int s = 0; s < Z; ++s) alive[s] = dfa.accepting[s];
  for (bool changed = true; changed;) {
    changed = false;
    for (int s = 0; s < Z; ++s) {
      if (alive[s]) continue;
      for (int a = 0; a < dfa.num_letters(); ++a) {
        if (alive[dfa.step(s, a)]) {
          alive[s] = 1;
          changed = true;
          break;
        }
      }
    }
  }
  std::vector<char> dead(Z);
  for (int s = 0; s < Z; ++s) dead[s] = alive[s] ? 0 : 1;
  return dead;
}

namespace {

struct StepOutcome {
  bool stop = false;
  Trajectory::Status status = Trajectory::Status::HorizonExhausted;
};

// Executes one closed-loop run; on a missing library net either fails
// (transfer == nullptr) or fine-tunes the nearest neighbor in place.
Trajectory run_loop(const ComposedPlanner& planner, const StepFunction& step,
                    const Vec& x0, std::mt19937_64& rng, NnLibrary* mutable_lib,
                    const ControllerGrid* controller_grid,
                    const NominalDynamics* nominal, const CostFunctional* cost,
                    const TrainConfig* cfg, int* trained_count) {
  const Dfa& dfa = *planner.dfa;
  const Workspace& ws = *planner.workspace;
  const std::vector<char> dead = dfa_dead_states(dfa);
  const NnLibrary& lib = mutable_lib ? *mutable_lib : *planner.library;

  Trajectory traj;
  Vec x = x0;
  int s = dfa.step(dfa.initial, ws.label_state(x));
  for (int k = 0;; ++k) {
    const long q = planner.state_grid->locate(x);
    TrajectoryStep rec;
    rec.k = k;
    rec.x = x;
    rec.q = q;
    rec.s = s;
    if (dfa.accepting[s]) {
      traj.steps.push_back(std::move(rec));
      traj.status = Trajectory::Status::Accepted;
      return traj;
    }
    if (dead[s]) {
      traj.steps.push_back(std::move(rec));
      traj.status = Trajectory::Status::Trap;
      return traj;
    }
    if (q == planner.state_grid->sink_index()) {
      traj.steps.push_back(std::move(rec));
      traj.status = Trajectory::Status::LeftDomain;
      return traj;
    }
    if (k == planner.horizon) {
      traj.steps.push_back(std::move(rec));
      traj.status = Trajectory::Status::HorizonExhausted;
      return traj;
    }

    const int P = planner.actions[k][planner.product_index(q, s)];
    if (P < 0) {
      traj.steps.push_back(std::move(rec));
      traj.status = Trajectory::Status::Trap;
      return traj;
    }
    const LibraryKey key{q, P};
    auto it = lib.entries.find(key);
    if (it == lib.entries.end()) {
      if (!mutable_lib)
        throw ConfigError("run_closed_loop: library is missing net (q=" +
                          std::to_string(q) + ", P=" + std::to_string(P) + ")");
      if (mutable_lib->entries.empty())
        throw ConfigError("runtime_transfer: empty library, nothing to adapt");
      double best = std::numeric_limits<double>::infinity();
      LibraryKey best_key = mutable_lib->entries.begin()->first;
      for (const auto& [cand, entry] : mutable_lib->entries) {
        const double d = nn_distance(*planner.state_grid, *controller_grid,
                                     key, cand, 1.0, 1.0);
        if (d < best - 1e-12) {
          best = d;
          best_key = cand;
        }
      }
      TrainConfig fine = *cfg;
      fine.episodes = cfg->transfer_episodes;
      std::mt19937_64 train_rng(derive_seed(cfg->seed, 0x7f000000u + q * 1024 + P));
      ReluNet net = mutable_lib->entries.at(best_key).net;
      net = gradient_phase(net, planner.state_grid->cell_box(q),
                           *controller_grid, P, *nominal, *cost, fine,
                           train_rng, nullptr);
      ProjectionResult proj = project_output_layer(
          net, planner.state_grid->cell_box(q), partition_box(*controller_grid, P));
      LibraryEntry entry;
      entry.net = std::move(proj.net);
      entry.episodes = fine.episodes;
      entry.projection_objective = proj.objective;
      it = mutable_lib->entries.emplace(key, std::move(entry)).first;
      if (trained_count) ++*trained_count;
    }

    const Vec u = it->second.net.eval(x);
    rec.u = u;
    traj.steps.push_back(std::move(rec));
    x = step(x, u, rng);
    s = dfa.step(s, ws.label_state(x));
  }
}

}  // namespace

Trajectory run_closed_loop(const ComposedPlanner& planner,
                           const StepFunction& step, const Vec& x0,
                           std::mt19937_64& rng) {
  return run_loop(planner, step, x0, rng, nullptr, nullptr, nullptr, nullptr,
                  nullptr, nullptr);
}

McResult mc_satisfaction(const ComposedPlanner& planner,
                         const StepFunction& step, const Vec& x0, long trials,
                         std::uint64_t seed) {
  McResult res;
  res.trials = trials;
  std::vector<char> outcomes(trials, 0);
  parallel_for(trials, [&](long t) {
    std::mt19937_64 rng(derive_seed(seed, t));
    const Trajectory traj = run_closed_loop(planner, step, x0, rng);
    outcomes[t] = traj.status == Trajectory::Status::Accepted ? 1 : 0;
  });
  for (char c : outcomes) res.accepted += c;
  if (trials == 0) return res;
  const double p = static_cast<double>(res.accepted) / trials;
  res.estimate = p;
  const double z = 1.959963984540054;  // 95%
  const double z2 = z * z;
  const double denom = 1.0 + z2 / trials;
  const double center = (p + z2 / (2.0 * trials)) / denom;
  const double half =
      z * std::sqrt(p * (1.0 - p) / trials + z2 / (4.0 * trials * trials)) / denom;
  res.ci_lo = std::max(0.0, center - half);
  res.ci_hi = std::min(1.0, center + half);
  return res;
}

double nn_distance(const StateGrid& state_grid,
                   const ControllerGrid& controller_grid, const LibraryKey& a,
                   const LibraryKey& b, double alpha1, double alpha2) {
  const Vec dq = state_grid.center(a.q) - state_grid.center(b.q);
  const Vec dp = controller_grid.center(a.P) - controller_grid.center(b.P);
  return alpha1 * dq.norm() + alpha2 * dp.lpNorm<Eigen::Infinity>();
}

std::vector<LibraryKey> referenced_keys(const DpResult& dp, long n_abstract,
                                        int n_dfa, int n_partitions) {
  (void)n_partitions;
  std::set<LibraryKey> keys;
  for (const auto& slice : dp.actions) {
    for (long q = 0; q + 1 < n_abstract; ++q) {  // sink has no nets
      for (int s = 0; s < n_dfa; ++s) {
        const int P = slice[q * n_dfa + s];
        if (P >= 0) keys.insert(LibraryKey{q, P});
      }
    }
  }
  return {keys.begin(), keys.end()};
}

NnLibrary train_transfer(const std::vector<PlanTask>& tasks,
                         const NominalDynamics& nominal,
                         const CostFunctional& cost, const TrainConfig& cfg) {
  NnLibrary lib;
  std::set<LibraryKey> wanted;
  const StateGrid* sg = nullptr;
  const ControllerGrid* cg = nullptr;
  for (const auto& task : tasks) {
    if (sg && (sg->hash() != task.state_grid->hash() ||
               cg->hash() != task.controller_grid->hash()))
      throw ConfigError("train_transfer: tasks must share the training grids");
    sg = task.state_grid;
    cg = task.controller_grid;
    const SymbolicMdp mdp =
        build_mdp(*task.state_grid, *task.controller_grid, *task.kernel);
    const ProductMdp product = build_product(
        mdp, *task.dfa, label_all_cells(*task.state_grid, *task.workspace));
    const DpResult dp = dp_solve(product, task.horizon);
    for (const auto& key :
         referenced_keys(dp, product.n_abstract(), product.n_dfa(),
                         mdp.n_partitions))
      wanted.insert(key);
  }
  if (!sg) return lib;
  lib.state_grid_hash = sg->hash();
  lib.controller_grid_hash = cg->hash();

  std::vector<LibraryKey> keys(wanted.begin(), wanted.end());
  std::vector<LibraryEntry> slots(keys.size());
  const long M = cg->cell_count();
  parallel_for(static_cast<long>(keys.size()), [&](long i) {
    const auto& key = keys[i];
    slots[i] = formal_train(sg->cell_box(key.q), *cg, key.P, nominal, cost, cfg,
                            derive_seed(cfg.seed, key.q * M + key.P));
  });
  for (std::size_t i = 0; i < keys.size(); ++i)
    lib.entries.emplace(keys[i], std::move(slots[i]));
  return lib;
}

TransferRunResult runtime_transfer(const ComposedPlanner& planner,
                                   const ControllerGrid& controller_grid,
                                   NnLibrary& library, const StepFunction& step,
                                   const NominalDynamics& nominal,
                                   const CostFunctional& cost,
                                   const TrainConfig& cfg, const Vec& x0,
                                   std::mt19937_64& rng) {
  TransferRunResult res;
  res.trajectory = run_loop(planner, step, x0, rng, &library, &controller_grid,
                            &nominal, &cost, &cfg, &res.nets_trained);
  return res;
}

ReluNet clone_behavior(const DemoSet& demos, int n, int m,
                       const TrainConfig& cfg) {
  if (demos.samples.empty()) throw ConfigError("clone_behavior: empty demo set");
  std::mt19937_64 rng(derive_seed(cfg.seed, 0xbc10u));
  ReluNet net = init_net(n, m, cfg, rng);
  const int epochs = 200;
  const double lr = 0.05;
  const double inv = 1.0 / static_cast<double>(demos.samples.size());
  for (int e = 0; e < epochs; ++e) {
    std::vector<Mat> dW;
    std::vector<Vec> db;
    for (const auto& l : net.layers) {
      dW.push_back(Mat::Zero(l.W.rows(), l.W.cols()));
      db.push_back(Vec::Zero(l.b.size()));
    }
    for (const auto& [x, u] : demos.samples) {
      // Gradient of |net(x) - u|^2 via one backprop pass per sample.
      const int F = static_cast<int>(net.layers.size());
      std::vector<Vec> acts(F), pre(F);
      Vec a = x;
      for (int l = 0; l < F; ++l) {
        acts[l] = a;
        pre[l] = net.layers[l].W * a + net.layers[l].b;
        a = l + 1 < F ? pre[l].cwiseMax(0.0).eval() : pre[l];
      }
      Vec delta = 2.0 * (a - u);
      for (int l = F - 1; l >= 0; --l) {
        dW[l] += delta * acts[l].transpose();
        db[l] += delta;
        if (l > 0) {
          Vec up = net.layers[l].W.transpose() * delta;
          for (int i = 0; i < up.size(); ++i)
            if (pre[l - 1][i] <= 0.0) up[i] = 0.0;
          delta = std::move(up);
        }
      }
    }
    for (std::size_t l = 0; l < dW.size(); ++l) {
      net.layers[l].W -= lr * inv * dW[l];
      net.layers[l].b -= lr * inv * db[l];
    }
  }
  return net;
}

SymbolicMdp build_mdp_from_demos(const StateGrid& state_grid,
                                 const ControllerGrid& controller_grid,
                                 const StochasticKernel& kernel,
                                 const DemoSet& demos, int I,
                                 const TrainConfig& cfg) {
  if (I < 1) throw ConfigError("build_mdp_from_demos: I must be >= 1");
  const int M = static_cast<int>(controller_grid.cell_count());
  const int n = state_grid.dim();
  const int m = controller_grid.dim() / (n + 1);
  const ReluNet bc = clone_behavior(demos, n, m, cfg);

  std::vector<Mat> Ks(M);
  std::vector<Vec> bs(M);
  for (int P = 0; P < M; ++P)
    partition_center_law(controller_grid, P, n, Ks[P], bs[P]);

  if (I >= M) return build_mdp(state_grid, controller_grid, kernel);

  // Rank partitions per cell first, then compute only the kept rows. Each
  // row comes from the same per-row builder as the full abstraction, so the
  // kept rows are bit-identical to build_mdp's.
  SymbolicMdp mdp;
  mdp.n_states = state_grid.cell_count();
  mdp.n_partitions = M;
  mdp.state_grid_hash = state_grid.hash();
  mdp.controller_grid_hash = controller_grid.hash();
  mdp.rows.resize(mdp.n_states * M);
  mdp.row_present.assign(mdp.n_states * M, 0);

  parallel_for(mdp.n_states, [&](long q) {
    const Vec z = state_grid.center(q);
    const Vec hint = bc.eval(z);
    std::vector<std::pair<double, int>> ranked(M);
    for (int P = 0; P < M; ++P)
      ranked[P] = {(Ks[P] * z + bs[P] - hint).norm(), P};
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const auto& a, const auto& b) {
                       return a.first < b.first;
                     });
    for (int i = 0; i < I; ++i) {
      const int P = ranked[i].second;
      mdp.rows[q * M + P] = build_mdp_row(state_grid, Ks[P], bs[P], kernel, q);
      mdp.row_present[q * M + P] = 1;
    }
  });
  return mdp;
}

AdaptResult adapt_partition(const Box& state_domain, const Vec& eta_q,
                            const Box& controller_domain, const Vec& eta_P,
                            const StochasticKernel& kernel, const Dfa& dfa,
                            const Workspace& ws,
                            const std::vector<Vec>& initial_points, int horizon,
                            const DemoSet& demos, int I, double p,
                            const NominalDynamics& nominal,
                            const CostFunctional& cost, const TrainConfig& cfg,
                            int max_rounds, bool train_nets) {
  if (p <= 0.0 || p > 1.0) throw ConfigError("adapt_partition: need 0 < p <= 1");
  Vec wq = eta_q;
  Vec wP = eta_P;
  int cur_I = I;

  AdaptResult res;
  for (int round = 0;; ++round) {
    res.state_grid = StateGrid(state_domain, wq);
    res.controller_grid = ControllerGrid(controller_domain, wP);
    const SymbolicMdp mdp = build_mdp_from_demos(
        res.state_grid, res.controller_grid, kernel, demos, cur_I, cfg);
    res.labels = label_all_cells(res.state_grid, ws);
    const ProductMdp product = build_product(mdp, dfa, res.labels);
    res.dp = dp_solve(product, horizon);

    double worst = 1.0;
    for (const Vec& x0 : initial_points) {
      const long q0 = res.state_grid.locate(x0);
      if (q0 == res.state_grid.sink_index())
        throw ConfigError("adapt_partition: initial point outside domain");
      worst = std::min(worst, res.dp.values[0][product.initial(q0)]);
    }
    res.achieved_value = worst;
    res.refinements = round;
    res.final_I = cur_I;
    if (worst >= p) {
      res.achieved = true;
      break;
    }
    if (round == max_rounds) {
      res.achieved = false;
      break;
    }
    wq *= 0.5;
    wP *= 0.5;
    cur_I *= 2;
  }

  if (train_nets) {
    std::vector<LibraryKey> keys = referenced_keys(
        res.dp, res.state_grid.cell_count() + 1, dfa.num_states(),
        static_cast<int>(res.controller_grid.cell_count()));
    res.library.state_grid_hash = res.state_grid.hash();
    res.library.controller_grid_hash = res.controller_grid.hash();
    std::vector<LibraryEntry> slots(keys.size());
    const long M = res.controller_grid.cell_count();
    parallel_for(static_cast<long>(keys.size()), [&](long i) {
      const auto& key = keys[i];
      slots[i] = formal_train(res.state_grid.cell_box(key.q),
                              res.controller_grid, key.P, nominal, cost, cfg,
                              derive_seed(cfg.seed, key.q * M + key.P));
    });
    for (std::size_t i = 0; i < keys.size(); ++i)
      res.library.entries.emplace(keys[i], std::move(slots[i]));
  }
  return res;
}

}  // namespace cpwa
