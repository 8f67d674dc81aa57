#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace cpwa {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using VecI = Eigen::VectorXi;

/// Shared numeric tolerances, stated once so every module agrees.
struct NumericConfig {
  double geometry_tol = 1e-9;     // vertex dedup, affine-piece agreement
  double feasibility_tol = 1e-8;  // halfspace satisfaction slack
  double lp_tol = 1e-7;           // LP constraint satisfaction / membership
  double prune_tol = 1e-12;       // transition probability pruning
  double variance_floor = 1e-6;   // kernel std floor (state units)
};

inline const NumericConfig& numerics() {
  static NumericConfig cfg;
  return cfg;
}

/// Hard capability limits for the exact geometric analyses.
struct EnumerationLimits {
  int max_hidden_layers = 2;
  int max_hidden_neurons = 16;
  int max_vertex_dim = 4;
  int max_atoms = 10;
};

inline const EnumerationLimits& limits() {
  static EnumerationLimits lim;
  return lim;
}

/// Thrown when an input violates a documented precondition.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Thrown when an input exceeds a documented capability bound.
struct CapabilityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Deterministic seed derivation for parallel work items.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t item) {
  // splitmix64 over (base ^ rotated item)
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (item + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace cpwa
