#include "cpwa/symbolic.hpp"

#include <cmath>

#include "cpwa/parallel.hpp"

namespace cpwa {

void partition_center_law(const ControllerGrid& grid, int P, int state_dim,
                          Mat& K_prime, Vec& b_prime) {
  const Vec z = grid.center(P);
  if (z.size() % (state_dim + 1) != 0)
    throw ConfigError("controller grid dimension is not m*(n+1)");
  const int m = static_cast<int>(z.size()) / (state_dim + 1);
  unflatten_gain(z, m, state_dim, K_prime, b_prime);
}

namespace {

// Per-dimension cell probabilities for cells whose interval intersects the
// +-8.5 sigma window; everything else is left for the sink.
struct DimSlice {
  long first = 0;
  std::vector<double> probs;
};

DimSlice dim_probs(const StateGrid& grid, int d, double mean, double sd) {
  const double lo_dom = grid.domain().lo[d];
  const double w = grid.cell_widths()[d];
  const long count = grid.counts()[d];
  const double span = 8.5 * sd;
  long first = static_cast<long>(std::floor((mean - span - lo_dom) / w));
  long last = static_cast<long>(std::floor((mean + span - lo_dom) / w));
  first = std::max<long>(first, 0);
  last = std::min<long>(last, count - 1);
  DimSlice slice;
  slice.first = first;
  for (long c = first; c <= last; ++c) {
    const double lo = lo_dom + static_cast<double>(c) * w;
    const double hi = lo + w;
    const double p = standard_normal_cdf((hi - mean) / sd) -
                     standard_normal_cdf((lo - mean) / sd);
    slice.probs.push_back(std::max(0.0, p));
  }
  return slice;
}

}  // namespace

std::vector<std::pair<long, double>> build_mdp_row(const StateGrid& state_grid,
                                                   const Mat& K_prime,
                                                   const Vec& b_prime,
                                                   const StochasticKernel& kernel,
                                                   long q) {
  const int n = state_grid.dim();
  const Vec z = state_grid.center(q);
  const Vec u = K_prime * z + b_prime;
  Vec mean, sd;
  kernel.moments(z, u, mean, sd);

  std::vector<DimSlice> slices;
  slices.reserve(n);
  long n_local = 1;
  for (int d = 0; d < n; ++d) {
    slices.push_back(dim_probs(state_grid, d, mean[d], sd[d]));
    n_local *= static_cast<long>(slices.back().probs.size());
  }

  std::vector<std::pair<long, double>> row;
  double kept = 0.0;
  for (long i = 0; i < n_local; ++i) {
    double p = 1.0;
    std::vector<long> cell(n);
    long rem = i;
    for (int d = 0; d < n; ++d) {
      const long c = rem % static_cast<long>(slices[d].probs.size());
      rem /= static_cast<long>(slices[d].probs.size());
      p *= slices[d].probs[c];
      cell[d] = slices[d].first + c;
    }
    if (p >= numerics().prune_tol) {
      row.emplace_back(state_grid.flat_index(cell), p);
      kept += p;
    }
  }
  const double sink_mass = std::max(0.0, 1.0 - kept);
  if (sink_mass > 0.0) row.emplace_back(state_grid.sink_index(), sink_mass);
  double total = kept + sink_mass;
  if (total <= 0.0) {
    row.assign(1, {state_grid.sink_index(), 1.0});
    total = 1.0;
  }
  for (auto& [succ, p] : row) p /= total;
  return row;
}

SymbolicMdp build_mdp(const StateGrid& state_grid,
                      const ControllerGrid& controller_grid,
                      const StochasticKernel& kernel) {
  SymbolicMdp mdp;
  mdp.n_states = state_grid.cell_count();
  mdp.n_partitions = static_cast<int>(controller_grid.cell_count());
  mdp.state_grid_hash = state_grid.hash();
  mdp.controller_grid_hash = controller_grid.hash();
  const long n_rows = mdp.n_states * mdp.n_partitions;
  mdp.rows.resize(n_rows);
  mdp.row_present.assign(n_rows, 1);

  const int n = state_grid.dim();
  const int M = mdp.n_partitions;

  // Partition-center laws, shared across rows.
  std::vector<Mat> Ks(M);
  std::vector<Vec> bs(M);
  for (int P = 0; P < M; ++P)
    partition_center_law(controller_grid, P, n, Ks[P], bs[P]);

  parallel_for(n_rows, [&](long r) {
    const long q = r / M;
    const int P = static_cast<int>(r % M);
    mdp.rows[r] = build_mdp_row(state_grid, Ks[P], bs[P], kernel, q);
  });
  return mdp;
}

std::vector<Letter> label_all_cells(const StateGrid& grid, const Workspace& ws) {
  std::vector<Letter> labels(grid.cell_count());
  for (long q = 0; q < grid.cell_count(); ++q)
    labels[q] = ws.label_cell(grid.cell_box(q));
  return labels;
}

ProductMdp build_product(const SymbolicMdp& mdp, const Dfa& dfa,
                         std::vector<Letter> labels) {
  if (static_cast<long>(labels.size()) != mdp.n_states)
    throw ConfigError("build_product: one label per abstract cell required");
  for (Letter l : labels)
    if (l >= static_cast<Letter>(1 << dfa.atoms.size()))
      throw ConfigError("build_product: label outside the DFA alphabet");
  ProductMdp p;
  p.mdp = &mdp;
  p.dfa = &dfa;
  p.labels = std::move(labels);
  return p;
}

std::vector<std::pair<long, double>> ProductMdp::row(long q, int s, int P) const {
  std::vector<std::pair<long, double>> out;
  if (q == mdp->sink()) {
    out.emplace_back(index(q, s), 1.0);
    return out;
  }
  for (const auto& [qn, prob] : mdp->row(q, P))
    out.emplace_back(index(qn, dfa->step(s, label(qn))), prob);
  return out;
}

DpResult dp_solve(const ProductMdp& product, int horizon) {
  if (horizon < 1) throw ConfigError("dp_solve: horizon must be >= 1");
  const long NA = product.n_abstract();
  const int Z = product.n_dfa();
  const int M = product.mdp->n_partitions;
  const long NP = product.n_states();

  DpResult res;
  res.values.assign(horizon + 1, std::vector<double>(NP, 0.0));
  res.actions.assign(horizon, std::vector<int>(NP, -1));

  for (long q = 0; q < NA; ++q)
    for (int s = 0; s < Z; ++s)
      res.values[horizon][product.index(q, s)] = product.accepting(q, s) ? 1.0 : 0.0;

  for (int k = horizon - 1; k >= 0; --k) {
    const auto& next = res.values[k + 1];
    auto& cur = res.values[k];
    auto& act = res.actions[k];
    parallel_for(NA, [&](long q) {
      for (int s = 0; s < Z; ++s) {
        const long idx = product.index(q, s);
        if (product.accepting(q, s)) {
          cur[idx] = 1.0;
          continue;
        }
        if (q == product.mdp->sink()) {
          cur[idx] = 0.0;
          continue;
        }
        double best = 0.0;
        int best_p = -1;
        for (int P = 0; P < M; ++P) {
          if (!product.mdp->present(q, P)) continue;
          double v = 0.0;
          for (const auto& [qn, prob] : product.mdp->row(q, P))
            v += prob * next[product.index(qn, product.dfa->step(
                                                   s, product.label(qn)))];
          if (best_p < 0 || v > best + 1e-15) {
            best = v;
            best_p = P;
          }
        }
        cur[idx] = best_p < 0 ? 0.0 : std::min(1.0, best);
        act[idx] = best_p;
      }
    });
  }
  return res;
}

}  // namespace cpwa
