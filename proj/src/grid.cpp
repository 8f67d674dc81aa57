#include "cpwa/grid.hpp"

#include <cmath>
#include <cstring>

namespace cpwa {

Box::Box(Vec lo_, Vec hi_) : lo(std::move(lo_)), hi(std::move(hi_)) {
  if (lo.size() != hi.size()) throw ConfigError("Box: lo/hi dimension mismatch");
  for (int d = 0; d < lo.size(); ++d) {
    if (!(lo[d] < hi[d]))
      throw ConfigError("Box: lo < hi violated in dimension " + std::to_string(d));
  }
}

bool Box::contains_half_open(const Vec& x) const {
  for (int d = 0; d < lo.size(); ++d)
    if (x[d] < lo[d] || x[d] >= hi[d]) return false;
  return true;
}

bool Box::contains_closed(const Vec& x, double tol) const {
  for (int d = 0; d < lo.size(); ++d)
    if (x[d] < lo[d] - tol || x[d] > hi[d] + tol) return false;
  return true;
}

bool Box::intersects(const Box& other) const {
  for (int d = 0; d < lo.size(); ++d)
    if (hi[d] <= other.lo[d] || other.hi[d] <= lo[d]) return false;
  return true;
}

bool Box::inside(const Box& outer, double tol) const {
  for (int d = 0; d < lo.size(); ++d)
    if (lo[d] < outer.lo[d] - tol || hi[d] > outer.hi[d] + tol) return false;
  return true;
}

UniformGrid::UniformGrid(Box domain, Vec widths)
    : domain_(std::move(domain)), widths_(std::move(widths)) {
  const int n = domain_.dim();
  if (widths_.size() != n) throw ConfigError("grid: widths dimension mismatch");
  counts_.resize(n);
  n_cells_ = 1;
  for (int d = 0; d < n; ++d) {
    if (widths_[d] <= 0.0)
      throw ConfigError("grid: nonpositive width in dimension " + std::to_string(d));
    const double extent = domain_.hi[d] - domain_.lo[d];
    const double ratio = extent / widths_[d];
    const double rounded = std::round(ratio);
    if (rounded < 1.0 || std::abs(ratio - rounded) > 1e-9 * std::max(1.0, rounded))
      throw ConfigError("grid: extent not divisible by width in dimension " +
                        std::to_string(d));
    counts_[d] = static_cast<int>(rounded);
    n_cells_ *= counts_[d];
  }
  strides_.resize(n);
  long s = 1;
  for (int d = 0; d < n; ++d) {  // dimension 0 varies fastest
    strides_[d] = s;
    s *= counts_[d];
  }
}

long UniformGrid::locate(const Vec& x) const {
  long idx = 0;
  for (int d = 0; d < dim(); ++d) {
    if (x[d] < domain_.lo[d] || x[d] > domain_.hi[d]) return sink_index();
    long c = static_cast<long>(std::floor((x[d] - domain_.lo[d]) / widths_[d]));
    if (c >= counts_[d]) c = counts_[d] - 1;  // top face folds into last cell
    idx += c * strides_[d];
  }
  return idx;
}

std::vector<long> UniformGrid::coords(long index) const {
  if (index < 0 || index >= n_cells_)
    throw ConfigError("grid: index out of range (or sink)");
  std::vector<long> c(dim());
  for (int d = 0; d < dim(); ++d) {
    c[d] = (index / strides_[d]) % counts_[d];
  }
  return c;
}

long UniformGrid::flat_index(const std::vector<long>& c) const {
  long idx = 0;
  for (int d = 0; d < dim(); ++d) idx += c[d] * strides_[d];
  return idx;
}

Vec UniformGrid::center(long index) const {
  const auto c = coords(index);
  Vec z(dim());
  for (int d = 0; d < dim(); ++d)
    z[d] = domain_.lo[d] + (static_cast<double>(c[d]) + 0.5) * widths_[d];
  return z;
}

Box UniformGrid::cell_box(long index) const {
  const auto c = coords(index);
  Vec lo(dim()), hi(dim());
  for (int d = 0; d < dim(); ++d) {
    lo[d] = domain_.lo[d] + static_cast<double>(c[d]) * widths_[d];
    hi[d] = domain_.lo[d] + static_cast<double>(c[d] + 1) * widths_[d];
  }
  return Box(lo, hi);
}

std::uint64_t UniformGrid::hash() const {
  std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
  auto mix = [&h](double v) {
    std::uint64_t bits;
    static_assert(sizeof(bits) == sizeof(v));
    std::memcpy(&bits, &v, sizeof(bits));
    for (int i = 0; i < 8; ++i) {
      h ^= (bits >> (8 * i)) & 0xff;
      h *= 1099511628211ULL;
    }
  };
  for (int d = 0; d < dim(); ++d) {
    mix(domain_.lo[d]);
    mix(domain_.hi[d]);
    mix(widths_[d]);
  }
  return h;
}

StateGrid build_state_grid(const Box& domain, const Vec& widths) {
  return StateGrid(domain, widths);
}

ControllerGrid build_controller_grid(const Box& domain, const Vec& widths) {
  return ControllerGrid(domain, widths);
}

}  // namespace cpwa
