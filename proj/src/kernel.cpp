#include "cpwa/kernel.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <map>

namespace cpwa {

double standard_normal_cdf(double z) {
  return 0.5 * std::erfc(-z / std::sqrt(2.0));
}

double GpModelError::k(const Vec& a, const Vec& b) const {
  double s = 0.0;
  for (int d = 0; d < a.size(); ++d) {
    const double r = (a[d] - b[d]) / hypers_.lengthscales[d];
    s += r * r;
  }
  return hypers_.signal_variance * std::exp(-0.5 * s);
}

GpModelError GpModelError::fit(
    const std::vector<std::pair<Vec, Vec>>& samples,
    const GpHyperparams& hypers) {
  if (samples.empty()) throw ConfigError("gp_fit: no samples");
  const int in_dim = static_cast<int>(samples.front().first.size());
  const int out_dim = static_cast<int>(samples.front().second.size());
  if (hypers.lengthscales.size() != in_dim)
    throw ConfigError("gp_fit: lengthscale dimension mismatch");

  // Average duplicate inputs (exact coordinate match).
  std::map<std::vector<double>, std::pair<Vec, int>> merged;
  for (const auto& [xu, y] : samples) {
    std::vector<double> key(xu.data(), xu.data() + xu.size());
    auto it = merged.find(key);
    if (it == merged.end()) {
      merged.emplace(std::move(key), std::make_pair(y, 1));
    } else {
      it->second.first += y;
      ++it->second.second;
    }
  }

  GpModelError gp;
  gp.hypers_ = hypers;
  Mat Y(static_cast<int>(merged.size()), out_dim);
  int row = 0;
  for (const auto& [key, acc] : merged) {
    Vec xu(in_dim);
    for (int d = 0; d < in_dim; ++d) xu[d] = key[d];
    gp.inputs_.push_back(std::move(xu));
    Y.row(row++) = (acc.first / acc.second).transpose();
  }

  const int n = static_cast<int>(gp.inputs_.size());
  Mat K(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) K(i, j) = gp.k(gp.inputs_[i], gp.inputs_[j]);

  double jitter = hypers.noise_variance;
  for (int attempt = 0;; ++attempt) {
    Eigen::LLT<Mat> llt(K + jitter * Mat::Identity(n, n));
    if (llt.info() == Eigen::Success) {
      gp.chol_ = llt.matrixL();
      gp.alpha_ = llt.solve(Y);
      return gp;
    }
    if (attempt >= 10)
      throw std::runtime_error("gp_fit: Cholesky failed after jitter escalation");
    jitter = std::max(jitter * 10.0, 1e-12);
  }
}

void GpModelError::posterior(const Vec& xu, Vec& mean, Vec& variance) const {
  const int n = static_cast<int>(inputs_.size());
  Vec kstar(n);
  for (int i = 0; i < n; ++i) kstar[i] = k(xu, inputs_[i]);
  mean = (kstar.transpose() * alpha_).transpose();
  const Vec w = chol_.triangularView<Eigen::Lower>().solve(kstar);
  const double var = std::max(0.0, hypers_.signal_variance - w.squaredNorm());
  variance = Vec::Constant(mean.size(), var);
}

void StochasticKernel::moments(const Vec& x, const Vec& u, Vec& mean,
                               Vec& std_dev) const {
  mean = nominal(x, u);
  std_dev = Vec::Constant(mean.size(), std::sqrt(variance_floor));
  if (!error.empty()) {
    Vec xu(x.size() + u.size());
    xu << x, u;
    Vec gm, gv;
    error.posterior(xu, gm, gv);
    if (gm.size() != mean.size())
      throw ConfigError("kernel: GP output dimension mismatch");
    mean += gm;
    for (int d = 0; d < mean.size(); ++d)
      std_dev[d] = std::sqrt(std::max(gv[d], variance_floor));
  }
}

Vec StochasticKernel::sample_next(const Vec& x, const Vec& u,
                                  std::mt19937_64& rng) const {
  Vec mean, sd;
  moments(x, u, mean, sd);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vec next(mean.size());
  for (int d = 0; d < mean.size(); ++d) next[d] = mean[d] + sd[d] * gauss(rng);
  return next;
}

double gaussian_box_integral(const Vec& mean, const Vec& std_dev,
                             const Box& box) {
  double p = 1.0;
  for (int d = 0; d < mean.size(); ++d) {
    const double lo = box.lo[d];
    const double hi = box.hi[d];
    const double phi_hi =
        std::isinf(hi) ? 1.0 : standard_normal_cdf((hi - mean[d]) / std_dev[d]);
    const double phi_lo =
        std::isinf(lo) ? 0.0 : standard_normal_cdf((lo - mean[d]) / std_dev[d]);
    p *= std::max(0.0, phi_hi - phi_lo);
  }
  return p;
}

}  // namespace cpwa
