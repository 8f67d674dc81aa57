#pragma once

#include <vector>

#include "cpwa/types.hpp"

namespace cpwa {

/// Axis-aligned box lo[d] < hi[d].
struct Box {
  Vec lo;
  Vec hi;

  Box() = default;
  Box(Vec lo_, Vec hi_);

  int dim() const { return static_cast<int>(lo.size()); }
  Vec center() const { return 0.5 * (lo + hi); }
  Vec widths() const { return hi - lo; }

  /// Half-open membership [lo, hi).
  bool contains_half_open(const Vec& x) const;
  /// Closed membership with tolerance.
  bool contains_closed(const Vec& x, double tol = 0.0) const;
  bool intersects(const Box& other) const;
  /// True iff this box is contained in `outer` (closed, with tolerance).
  bool inside(const Box& outer, double tol = 0.0) const;
};

/// Uniform axis-aligned partition of a box into cells plus a sink index
/// for everything outside the domain.
class UniformGrid {
 public:
  UniformGrid() = default;
  UniformGrid(Box domain, Vec widths);

  const Box& domain() const { return domain_; }
  const Vec& cell_widths() const { return widths_; }
  const VecI& counts() const { return counts_; }
  int dim() const { return domain_.dim(); }

  /// Number of real cells (sink excluded).
  long cell_count() const { return n_cells_; }
  long sink_index() const { return n_cells_; }

  /// Half-open cell lookup; the top domain face folds into the last cell.
  /// Out-of-domain states map to the sink.
  long locate(const Vec& x) const;

  /// Midpoint of cell `index`; rejects the sink.
  Vec center(long index) const;

  /// Box of cell `index`; rejects the sink.
  Box cell_box(long index) const;

  /// Per-dimension cell coordinates of a flat index.
  std::vector<long> coords(long index) const;
  long flat_index(const std::vector<long>& c) const;

  /// Stable content hash of (domain, widths), used to guard artifact mixing.
  std::uint64_t hash() const;

 private:
  Box domain_;
  Vec widths_;
  VecI counts_;
  long n_cells_ = 0;
  std::vector<long> strides_;
};

using StateGrid = UniformGrid;
using ControllerGrid = UniformGrid;

StateGrid build_state_grid(const Box& domain, const Vec& widths);
ControllerGrid build_controller_grid(const Box& domain, const Vec& widths);

}  // namespace cpwa
