#include "cpwa/dynamics.hpp"

#include <cmath>

namespace cpwa {

Vec dubins_step(const DubinsParams& p, const Vec& x, const Vec& u) {
  if (x.size() != 3 || u.size() != 1)
    throw ConfigError("dubins_step: expects 3-D state and scalar input");
  Vec next(3);
  next[0] = x[0] + p.dt * p.v * std::cos(x[2]);
  next[1] = x[1] + p.dt * p.v * std::sin(x[2]);
  const double two_pi = 2.0 * M_PI;
  double theta = std::fmod(x[2] + p.dt * u[0], two_pi);
  if (theta < 0.0) theta += two_pi;
  next[2] = theta;
  return next;
}

NominalDynamics make_dubins(const DubinsParams& p) {
  return [p](const Vec& x, const Vec& u) { return dubins_step(p, x, u); };
}

Vec integrator_chain_step(const Mat& B, const Vec& x, const Vec& u) {
  if (B.rows() != x.size() || B.cols() != u.size())
    throw ConfigError("integrator_chain_step: dimension mismatch");
  return x + B * u;
}

Mat default_integrator_coupling(int n, int m) {
  Mat B = Mat::Zero(n, m);
  for (int i = 0; i < std::min(n, m); ++i) B(i, i) = 1.0;
  return B;
}

NominalDynamics make_integrator_chain(const Mat& B) {
  return [B](const Vec& x, const Vec& u) { return integrator_chain_step(B, x, u); };
}

}  // namespace cpwa
