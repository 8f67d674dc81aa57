#include "cpwa/bounds.hpp"

#include <cmath>

namespace cpwa {

namespace {

void check(const BoundParams& p) {
  if (p.Lambda.size() != p.B.size())
    throw ConfigError("bounds: Lambda/B size mismatch");
  if (p.m <= 0 || p.n <= 0 || p.H <= 0 || p.Z <= 0)
    throw ConfigError("bounds: m, n, H, Z must be positive");
}

}  // namespace

DeltaResult delta_nn(const BoundParams& p) {
  check(p);
  if (p.L.size() != p.B.size()) throw ConfigError("bounds: L size mismatch");
  const double root = std::sqrt(static_cast<double>(p.m) * (p.n + 1));
  DeltaResult res;
  for (int i = 0; i < p.Lambda.size(); ++i) {
    const double v = p.Lambda[i] * p.eta_q + p.B[i] * p.L[i] * p.eta_q +
                     root * p.Lx * p.B[i] * p.eta_P;
    if (v > res.value) {
      res.value = v;
      res.achieving_cell = i;
    }
    if (res.achieving_cell < 0) res.achieving_cell = i;
  }
  return res;
}

DeltaResult delta_star(const BoundParams& p) {
  check(p);
  const double root = std::sqrt(static_cast<double>(p.m) * (p.n + 1));
  DeltaResult res;
  for (int i = 0; i < p.Lambda.size(); ++i) {
    const double v = p.Lambda[i] * p.eta_q + p.B[i] * p.Lp * p.eta_q +
                     2.0 * root * p.Lx * p.B[i] * p.eta_P;
    if (v > res.value) {
      res.value = v;
      res.achieving_cell = i;
    }
    if (res.achieving_cell < 0) res.achieving_cell = i;
  }
  return res;
}

std::pair<double, double> satisfaction_envelope(double v0,
                                                const BoundParams& p) {
  if (v0 < 0.0 || v0 > 1.0)
    throw ConfigError("satisfaction_envelope: value outside [0,1]");
  const double eps = static_cast<double>(p.H) * p.Z * delta_nn(p).value;
  return {std::max(0.0, v0 - eps), std::min(1.0, v0 + eps)};
}

std::pair<double, double> gaussian_kernel_lipschitz(const Vec& sigma,
                                                    double mean_lip_x,
                                                    double mean_lip_u) {
  double inv_sum = 0.0;
  for (int d = 0; d < sigma.size(); ++d) {
    if (sigma[d] <= 0.0)
      throw ConfigError("gaussian_kernel_lipschitz: nonpositive sigma");
    inv_sum += 1.0 / sigma[d];
  }
  const double c = std::sqrt(2.0 / M_PI) * inv_sum;
  return {c * mean_lip_x, c * mean_lip_u};
}

}  // namespace cpwa
