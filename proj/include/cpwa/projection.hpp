#pragma once

#include <vector>

#include "cpwa/lp.hpp"
#include "cpwa/relunet.hpp"

namespace cpwa {

/// Flattening convention for affine-controller parameters: row-major over the
/// m x (n+1) block [K' | b'], i.e. entry i*(n+1)+j is K'(i,j) for j < n and
/// b'(i) for j = n. Controller boxes (families) live in this coordinate order.
Vec flatten_gain(const Mat& K_prime, const Vec& b_prime);
void unflatten_gain(const Vec& z, int m, int n, Mat& K_prime, Vec& b_prime);

struct MembershipReport {
  bool inside = false;
  std::vector<int> violating_regions;  // indices into the CpwaMap
};

/// True iff every linear region of `net` over `q` has its affine piece inside
/// the box `family` (interval containment at the LP tolerance).
MembershipReport check_membership(const ReluNet& net, const Box& q,
                                  const Box& family);
MembershipReport check_membership(const CpwaMap& map, const Box& family);

struct ProjectionResult {
  ReluNet net;       // input net with output-layer weights replaced
  double objective;  // optimal vertex-evaluated output-change bound
};

/// Rewrite only the output-layer weights so the net's restriction to `q` lies
/// in `family`, minimizing the vertex-evaluated output-change bound. A second
/// LP pass minimizes the total weight perturbation among optimal solutions,
/// so the operator is deterministic and idempotent.
ProjectionResult project_output_layer(const ReluNet& net, const Box& q,
                                      const Box& family);

/// Vertex-evaluated upper bound on the l1 output change between two nets
/// sharing all hidden layers: max over region vertices of
/// sum_ij |dW_ij| h_j(x) + sum_i |db_i|.
double output_change_bound(const ReluNet& before, const ReluNet& after,
                           const Box& q);

}  // namespace cpwa
