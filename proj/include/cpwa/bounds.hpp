#pragma once

#include <utility>
#include <vector>

#include "cpwa/types.hpp"

namespace cpwa {

/// Inputs of the satisfaction-error bounds. Per-cell vectors are indexed by
/// abstract state; Lambda/B are the integrated state/action Lipschitz
/// constants of the kernel, L the per-cell net Lipschitz constants.
struct BoundParams {
  Vec Lambda;          // per cell
  Vec B;               // per cell
  Vec L;               // per cell (library net Lipschitz)
  double Lx = 0.0;     // sup norm of states over the domain
  double Lp = 0.0;     // sup of |K| over the controller box
  double eta_q = 0.0;  // state grid width (max over dimensions)
  double eta_P = 0.0;  // controller grid width (max over dimensions)
  int H = 0, Z = 0;
  int m = 0, n = 0;    // action and state dimensions
};

struct DeltaResult {
  double value = 0.0;
  int achieving_cell = -1;
};

/// max_i Lambda_i eta_q + B_i L_i eta_q + sqrt(m(n+1)) Lx B_i eta_P.
DeltaResult delta_nn(const BoundParams& p);

/// max_i Lambda_i eta_q + B_i Lp eta_q + 2 sqrt(m(n+1)) Lx B_i eta_P.
DeltaResult delta_star(const BoundParams& p);

/// [max(0, v0 - H Z delta_nn), min(1, v0 + H Z delta_nn)].
std::pair<double, double> satisfaction_envelope(double v0, const BoundParams& p);

/// Conservative kernel Lipschitz constants for the diagonal-Gaussian case:
/// a unit mean shift moves at most sqrt(2/pi)/sigma of 1-D density mass, so
/// Lambda = sqrt(2/pi) * mean_lip_x * sum_d 1/sigma_d, and likewise B.
std::pair<double, double> gaussian_kernel_lipschitz(const Vec& sigma,
                                                    double mean_lip_x,
                                                    double mean_lip_u);

}  // namespace cpwa
