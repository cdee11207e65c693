#pragma once

#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "parapde/grid.hpp"
#include "parapde/rng.hpp"

namespace parapde {

// Axis-aligned box in physical coordinates, bounds inclusive.
struct Region {
  double xmin = 0.0;
  double xmax = 0.0;
  double ymin = 0.0;
  double ymax = 0.0;
};

inline Region full_region(const Grid2D& grid) {
  return {grid.x[0], grid.x[grid.nx() - 1], grid.y[0], grid.y[grid.ny() - 1]};
}

// Fixed set of spatial locations plus the retained time indices. The same
// spatial points are used at every retained timestep.
struct SampledSet {
  std::vector<std::pair<Eigen::Index, Eigen::Index>> points;  // (ix, iy)
  std::vector<Eigen::Index> times;
};

inline SampledSet subsample_points(const Field2D& field, Eigen::Index count,
                                   Eigen::Index every_kth_time, const Region& region,
                                   std::uint64_t seed) {
  const Grid2D& g = field.grid;
  const Eigen::Index m = g.nt();
  if (count < 1) throw std::invalid_argument("subsample_points: count must be positive");
  if (every_kth_time < 1 || every_kth_time > m)
    throw std::invalid_argument("subsample_points: every_kth_time must be in [1, m]");
  if (region.xmin > region.xmax || region.ymin > region.ymax)
    throw std::invalid_argument("subsample_points: empty region");
  const double tol_x = 1e-9 * g.dx, tol_y = 1e-9 * g.dy;
  if (region.xmin < g.x[0] - tol_x || region.xmax > g.x[g.nx() - 1] + tol_x ||
      region.ymin < g.y[0] - tol_y || region.ymax > g.y[g.ny() - 1] + tol_y)
    throw std::invalid_argument("subsample_points: region outside grid");

  std::vector<std::pair<Eigen::Index, Eigen::Index>> candidates;
  for (Eigen::Index ix = 0; ix < g.nx(); ++ix) {
    if (g.x[ix] < region.xmin - tol_x || g.x[ix] > region.xmax + tol_x) continue;
    for (Eigen::Index iy = 0; iy < g.ny(); ++iy) {
      if (g.y[iy] < region.ymin - tol_y || g.y[iy] > region.ymax + tol_y) continue;
      candidates.emplace_back(ix, iy);
    }
  }
  if (static_cast<std::size_t>(count) > candidates.size())
    throw std::invalid_argument("subsample_points: count exceeds region size");

  SampledSet out;
  RandomStream rng(seed);
  for (std::size_t pick : rng.sample_without_replacement(candidates.size(),
                                                         static_cast<std::size_t>(count)))
    out.points.push_back(candidates[pick]);
  for (Eigen::Index j = 0; j < m; j += every_kth_time) out.times.push_back(j);
  return out;
}

}  // namespace parapde
