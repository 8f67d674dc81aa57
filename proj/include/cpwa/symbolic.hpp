#pragma once

#include <utility>
#include <vector>

#include "cpwa/kernel.hpp"
#include "cpwa/ltl.hpp"
#include "cpwa/projection.hpp"

namespace cpwa {

/// Finite abstraction of the stochastic dynamics: N grid cells plus an
/// absorbing sink, M controller partitions as the action alphabet.
struct SymbolicMdp {
  long n_states = 0;    // real cells, sink excluded
  int n_partitions = 0;
  std::uint64_t state_grid_hash = 0;
  std::uint64_t controller_grid_hash = 0;

  /// rows[q * M + P]: sparse successor list (q' or sink, probability).
  /// Rows absent under demo-guided pruning are flagged not-present.
  std::vector<std::vector<std::pair<long, double>>> rows;
  std::vector<char> row_present;

  long sink() const { return n_states; }
  const std::vector<std::pair<long, double>>& row(long q, int P) const {
    return rows[q * n_partitions + P];
  }
  bool present(long q, int P) const { return row_present[q * n_partitions + P] != 0; }
};

/// Abstraction rows for every (cell, partition): kernel moments taken at the
/// cell center under the partition-center affine law, cell probabilities by
/// Gaussian box integrals, sub-threshold successors pruned into the sink,
/// rows renormalized to exactly 1.
SymbolicMdp build_mdp(const StateGrid& state_grid,
                      const ControllerGrid& controller_grid,
                      const StochasticKernel& kernel);

/// Affine law of a controller partition's center: u = K' x + b'.
void partition_center_law(const ControllerGrid& grid, int P, int state_dim,
                          Mat& K_prime, Vec& b_prime);

/// Successor row of one (cell, partition-center law) pair; build_mdp is the
/// row-wise aggregation of this.
std::vector<std::pair<long, double>> build_mdp_row(const StateGrid& state_grid,
                                                   const Mat& K_prime,
                                                   const Vec& b_prime,
                                                   const StochasticKernel& kernel,
                                                   long q);

std::vector<Letter> label_all_cells(const StateGrid& grid, const Workspace& ws);

/// Synchronous product with a specification DFA. Stored explicitly only for
/// small instances; the DP solver consumes the factored form directly.
struct ProductMdp {
  const SymbolicMdp* mdp = nullptr;
  const Dfa* dfa = nullptr;
  std::vector<Letter> labels;  // per abstract cell; sink labels empty

  long n_abstract() const { return mdp->n_states + 1; }  // sink included
  int n_dfa() const { return dfa->num_states(); }
  long n_states() const { return n_abstract() * n_dfa(); }
  long index(long q, int s) const { return q * n_dfa() + s; }
  Letter label(long q) const {
    return q == mdp->sink() ? 0u : labels[q];
  }
  bool accepting(long q, int s) const {
    return q != mdp->sink() && dfa->accepting[s] != 0;
  }
  /// Initial product state for a run starting in cell q0.
  long initial(long q0) const {
    return index(q0, dfa->step(dfa->initial, label(q0)));
  }
  /// Successor list of ((q,s), P): (product index, probability).
  std::vector<std::pair<long, double>> row(long q, int s, int P) const;
};

ProductMdp build_product(const SymbolicMdp& mdp, const Dfa& dfa,
                         std::vector<Letter> labels);

/// Backward DP over the product: values[k][(q,s)] for k = 0..H and the
/// argmax partition actions[k][(q,s)] for k < H (-1 where no action applies).
struct DpResult {
  std::vector<std::vector<double>> values;
  std::vector<std::vector<int>> actions;
};

DpResult dp_solve(const ProductMdp& product, int horizon);

}  // namespace cpwa
