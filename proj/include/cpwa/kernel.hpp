#pragma once

#include <functional>
#include <random>
#include <vector>

#include "cpwa/grid.hpp"
#include "cpwa/types.hpp"

namespace cpwa {

/// Deterministic nominal next-state map f(x, u).
using NominalDynamics = std::function<Vec(const Vec&, const Vec&)>;

struct GpHyperparams {
  double signal_variance = 1.0;
  Vec lengthscales;  // per input dimension of (x, u)
  double noise_variance = 1e-6;
};

/// Exact GP posterior with a squared-exponential kernel, one independent GP
/// per output dimension (diagonal predictive covariance).
class GpModelError {
 public:
  GpModelError() = default;

  /// samples: ((x,u) concatenated input, residual vector). Duplicate inputs
  /// are averaged before fitting.
  static GpModelError fit(const std::vector<std::pair<Vec, Vec>>& samples,
                          const GpHyperparams& hypers);

  bool empty() const { return inputs_.empty(); }
  int output_dim() const { return static_cast<int>(alpha_.cols()); }

  /// Posterior mean and variance per output dimension at input (x,u).
  void posterior(const Vec& xu, Vec& mean, Vec& variance) const;

 private:
  std::vector<Vec> inputs_;
  GpHyperparams hypers_;
  Mat alpha_;  // K^{-1} Y, one column per output dimension
  Mat chol_;   // lower Cholesky factor of K + noise

  double k(const Vec& a, const Vec& b) const;
};

/// One-step stochastic dynamics t(.|x,u) = Normal(f(x,u) + mu_g, sigma_g^2),
/// diagonal covariance with a configured variance floor.
struct StochasticKernel {
  NominalDynamics nominal;
  GpModelError error;  // may be empty
  double variance_floor = 1e-6;

  /// mean = f(x,u) + mu_g(x,u); std per dimension with the floor applied.
  void moments(const Vec& x, const Vec& u, Vec& mean, Vec& std_dev) const;

  Vec sample_next(const Vec& x, const Vec& u, std::mt19937_64& rng) const;
};

/// prod_d [Phi((hi_d - mean_d)/std_d) - Phi((lo_d - mean_d)/std_d)].
/// Infinite box bounds are honored.
double gaussian_box_integral(const Vec& mean, const Vec& std_dev,
                             const Box& box);

double standard_normal_cdf(double z);

}  // namespace cpwa
