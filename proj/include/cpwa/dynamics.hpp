#pragma once

#include "cpwa/kernel.hpp"
#include "cpwa/types.hpp"

namespace cpwa {

/// Unicycle kinematics: state (x, y, heading), scalar turn-rate input.
struct DubinsParams {
  double v = 0.3;   // speed
  double dt = 1.0;  // step
};

/// x += dt v cos(theta), y += dt v sin(theta), theta += dt u, wrapped [0, 2pi).
Vec dubins_step(const DubinsParams& p, const Vec& x, const Vec& u);

NominalDynamics make_dubins(const DubinsParams& p);

/// Linear chain x' = x + B u with A = identity.
Vec integrator_chain_step(const Mat& B, const Vec& x, const Vec& u);

/// Default input coupling: u enters the first rows of the state.
Mat default_integrator_coupling(int n, int m);

NominalDynamics make_integrator_chain(const Mat& B);

}  // namespace cpwa
