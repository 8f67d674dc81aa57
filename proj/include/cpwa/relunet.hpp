#pragma once

#include <string>
#include <vector>

#include "cpwa/grid.hpp"
#include "cpwa/types.hpp"

namespace cpwa {

/// Fully connected ReLU network: rectified hidden layers, affine output layer.
struct ReluNet {
  struct Layer {
    Mat W;
    Vec b;
  };
  std::vector<Layer> layers;  // last layer is the (non-rectified) output

  int input_dim() const { return static_cast<int>(layers.front().W.cols()); }
  int output_dim() const { return static_cast<int>(layers.back().W.rows()); }
  int hidden_layer_count() const { return static_cast<int>(layers.size()) - 1; }
  int hidden_neuron_count() const;
  /// Width of the last hidden layer (input_dim for an affine net).
  int last_hidden_width() const;

  void check_composable() const;

  Vec eval(const Vec& x) const;
  /// Output of the last hidden layer h(x); identity for an affine net.
  Vec hidden_eval(const Vec& x) const;

  std::string to_json() const;
  static ReluNet from_json(const std::string& text);
};

/// One affine piece u = K' x + b' of a CPWA function.
struct AffinePiece {
  Mat K_prime;
  Vec b_prime;

  Vec eval(const Vec& x) const { return K_prime * x + b_prime; }
};

/// Intersection of halfspaces a.x <= c.
struct HPolytope {
  Mat A;
  Vec c;

  int dim() const { return static_cast<int>(A.cols()); }
  int num_halfspaces() const { return static_cast<int>(A.rows()); }
  bool contains(const Vec& x, double tol) const;
  void add(const Vec& a, double rhs);
  static HPolytope from_box(const Box& box);
};

struct LinearRegion {
  HPolytope region;
  AffinePiece piece;
  /// Hidden-layer affine form on this region: h(x) = C x + d.
  Mat hidden_C;
  Vec hidden_d;
  std::vector<bool> activation;  // one bit per hidden neuron, layer by layer
};

/// Exact linear-region decomposition of a net restricted to a box q.
struct CpwaMap {
  Box box;
  std::vector<LinearRegion> regions;
  int merged_degenerate = 0;  // duplicate hyperplanes merged during search
};

/// Enumerate the full-dimensional linear regions of `net` over `q` by
/// activation-pattern search with LP feasibility pruning.
CpwaMap enumerate_regions(const ReluNet& net, const Box& q);

/// All vertices of a bounded polytope by n-subset intersection.
std::vector<Vec> region_vertices(const HPolytope& poly);

/// Exact Lipschitz constant of the CPWA function realized by `net` on `q`
/// (max induced 2-norm of the per-region gain matrices).
double lipschitz_on(const ReluNet& net, const Box& q);

/// Union of region vertices of the net's regions intersected with q.
std::vector<Vec> cpwa_vertices(const CpwaMap& map);

}  // namespace cpwa
