#include "cpwa/trainer.hpp"

#include <cmath>
#include <json.hpp>

#include "cpwa/parallel.hpp"

namespace cpwa {

Box partition_box(const ControllerGrid& grid, int P) { return grid.cell_box(P); }

ReluNet init_net(int n, int m, const TrainConfig& cfg, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(-cfg.init_range, cfg.init_range);
  ReluNet net;
  int in = n;
  for (int l = 0; l < cfg.hidden_layers; ++l) {
    ReluNet::Layer layer;
    layer.W.resize(cfg.hidden_neurons, in);
    layer.b.resize(cfg.hidden_neurons);
    for (int i = 0; i < layer.W.rows(); ++i) {
      for (int j = 0; j < layer.W.cols(); ++j) layer.W(i, j) = unif(rng);
      layer.b[i] = unif(rng);
    }
    net.layers.push_back(std::move(layer));
    in = cfg.hidden_neurons;
  }
  ReluNet::Layer out;
  out.W.resize(m, in);
  out.b.resize(m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < in; ++j) out.W(i, j) = unif(rng);
    out.b[i] = unif(rng);
  }
  net.layers.push_back(std::move(out));
  return net;
}

namespace {

struct NetGrads {
  std::vector<Mat> dW;
  std::vector<Vec> db;

  explicit NetGrads(const ReluNet& net) {
    for (const auto& l : net.layers) {
      dW.push_back(Mat::Zero(l.W.rows(), l.W.cols()));
      db.push_back(Vec::Zero(l.b.size()));
    }
  }
};

// Accumulate the gradient of out_grad . net(x) into grads.
void backprop(const ReluNet& net, const Vec& x, const Vec& out_grad,
              NetGrads& grads) {
  const int F = static_cast<int>(net.layers.size());
  std::vector<Vec> acts(F);  // post-activation input of each layer
  std::vector<Vec> pre(F);
  Vec a = x;
  for (int l = 0; l < F; ++l) {
    acts[l] = a;
    pre[l] = net.layers[l].W * a + net.layers[l].b;
    a = l + 1 < F ? pre[l].cwiseMax(0.0).eval() : pre[l];
  }
  Vec delta = out_grad;
  for (int l = F - 1; l >= 0; --l) {
    grads.dW[l] += delta * acts[l].transpose();
    grads.db[l] += delta;
    if (l > 0) {
      Vec up = net.layers[l].W.transpose() * delta;
      for (int i = 0; i < up.size(); ++i)
        if (pre[l - 1][i] <= 0.0) up[i] = 0.0;
      delta = std::move(up);
    }
  }
}

}  // namespace

ReluNet gradient_phase(const ReluNet& net_in, const Box& q,
                       const ControllerGrid& controller_grid, int P,
                       const NominalDynamics& nominal,
                       const CostFunctional& cost, const TrainConfig& cfg,
                       std::mt19937_64& rng, double* mean_reward) {
  ReluNet net = net_in;
  const int n = q.dim();
  Mat K;
  Vec b;
  {
    const Vec z = controller_grid.center(P);
    const int m = static_cast<int>(z.size()) / (n + 1);
    unflatten_gain(z, m, n, K, b);
  }
  const int m = static_cast<int>(b.size());
  const int T = cost.rollout_steps;
  std::uniform_real_distribution<double> ux(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double sigma2 = cfg.noise_scale * cfg.noise_scale;

  // Per-step running baselines of the reward-to-go.
  Vec baseline = Vec::Zero(T);
  Vec baseline_n = Vec::Zero(T);
  double reward_sum = 0.0;

  for (int ep = 0; ep < cfg.episodes; ++ep) {
    Vec x(n);
    for (int d = 0; d < n; ++d)
      x[d] = q.lo[d] + ux(rng) * (q.hi[d] - q.lo[d]);

    std::vector<Vec> xs(T), eps(T);
    Vec rewards(T);
    for (int t = 0; t < T; ++t) {
      xs[t] = x;
      Vec noise(m);
      for (int i = 0; i < m; ++i) noise[i] = cfg.noise_scale * gauss(rng);
      eps[t] = noise;
      const Vec u = net.eval(x) + noise;
      const Vec kappa = K * x + b;
      double r = -cfg.w2 * (u - kappa).norm();
      if (cfg.w1 != 0.0) r -= cfg.w1 * cost.cost(x, u);
      rewards[t] = r;
      x = nominal(x, u);
      // Keep rollouts on the cell the policy is certified for.
      x = x.cwiseMax(q.lo).cwiseMin(q.hi);
    }
    reward_sum += rewards.sum();

    if (cfg.learning_rate == 0.0) continue;
    NetGrads grads(net);
    double togo = 0.0;
    Vec togos(T);
    for (int t = T - 1; t >= 0; --t) {
      togo += rewards[t];
      togos[t] = togo;
    }
    for (int t = 0; t < T; ++t) {
      const double adv = togos[t] - (baseline_n[t] > 0.0 ? baseline[t] : 0.0);
      backprop(net, xs[t], (adv / sigma2) * eps[t], grads);
      baseline_n[t] += 1.0;
      baseline[t] += (togos[t] - baseline[t]) / baseline_n[t];
    }
    double gnorm2 = 0.0;
    for (std::size_t l = 0; l < grads.dW.size(); ++l)
      gnorm2 += grads.dW[l].squaredNorm() + grads.db[l].squaredNorm();
    const double gnorm = std::sqrt(gnorm2);
    const double scale =
        cfg.learning_rate * (gnorm > 1.0 ? 1.0 / gnorm : 1.0);
    for (std::size_t l = 0; l < grads.dW.size(); ++l) {
      net.layers[l].W += scale * grads.dW[l];
      net.layers[l].b += scale * grads.db[l];
    }
  }
  if (mean_reward)
    *mean_reward = reward_sum / (static_cast<double>(cfg.episodes) * T);
  return net;
}

LibraryEntry formal_train(const Box& q, const ControllerGrid& controller_grid,
                          int P, const NominalDynamics& nominal,
                          const CostFunctional& cost, const TrainConfig& cfg,
                          std::uint64_t item_seed) {
  std::mt19937_64 rng(item_seed);
  const int n = q.dim();
  const int m =
      static_cast<int>(controller_grid.dim()) / (n + 1);
  ReluNet net = init_net(n, m, cfg, rng);
  const Box family = partition_box(controller_grid, P);

  LibraryEntry entry;
  for (int it = 0; it < cfg.max_iter; ++it) {
    net = gradient_phase(net, q, controller_grid, P, nominal, cost, cfg, rng,
                         &entry.mean_reward);
    ProjectionResult proj = project_output_layer(net, q, family);
    net = std::move(proj.net);
    entry.projection_objective = proj.objective;
    entry.episodes += cfg.episodes;
  }
  entry.net = std::move(net);
  return entry;
}

NnLibrary train_library(const StateGrid& state_grid,
                        const ControllerGrid& controller_grid,
                        const NominalDynamics& nominal,
                        const CostFunctional& cost, const TrainConfig& cfg) {
  const long N = state_grid.cell_count();
  const long M = controller_grid.cell_count();
  std::vector<LibraryEntry> slots(N * M);
  parallel_for(N * M, [&](long item) {
    const long q = item / M;
    const int P = static_cast<int>(item % M);
    slots[item] = formal_train(state_grid.cell_box(q), controller_grid, P,
                               nominal, cost, cfg, derive_seed(cfg.seed, item));
  });
  NnLibrary lib;
  lib.state_grid_hash = state_grid.hash();
  lib.controller_grid_hash = controller_grid.hash();
  for (long item = 0; item < N * M; ++item)
    lib.entries.emplace(LibraryKey{item / M, static_cast<int>(item % M)},
                        std::move(slots[item]));
  return lib;
}

std::string NnLibrary::to_json() const {
  nlohmann::json j;
  j["state_grid_hash"] = state_grid_hash;
  j["controller_grid_hash"] = controller_grid_hash;
  j["entries"] = nlohmann::json::array();
  for (const auto& [key, entry] : entries) {
    nlohmann::json je;
    je["q"] = key.q;
    je["P"] = key.P;
    je["net"] = nlohmann::json::parse(entry.net.to_json());
    je["episodes"] = entry.episodes;
    je["mean_reward"] = entry.mean_reward;
    je["projection_objective"] = entry.projection_objective;
    j["entries"].push_back(std::move(je));
  }
  return j.dump(2);
}

NnLibrary NnLibrary::from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  NnLibrary lib;
  lib.state_grid_hash = j.at("state_grid_hash").get<std::uint64_t>();
  lib.controller_grid_hash = j.at("controller_grid_hash").get<std::uint64_t>();
  for (const auto& je : j.at("entries")) {
    LibraryEntry entry;
    entry.net = ReluNet::from_json(je.at("net").dump());
    entry.episodes = je.at("episodes").get<int>();
    entry.mean_reward = je.at("mean_reward").get<double>();
    entry.projection_objective = je.at("projection_objective").get<double>();
    lib.entries.emplace(
        LibraryKey{je.at("q").get<long>(), je.at("P").get<int>()},
        std::move(entry));
  }
  return lib;
}

}  // namespace cpwa
