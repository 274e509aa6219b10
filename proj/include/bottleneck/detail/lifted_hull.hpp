#pragma once

// Exact Quickhull on integer points in dimension 2..4.  Coordinates are
// int64; orientation predicates are evaluated in __int128 so no tolerance is
// involved and coplanar points never produce inconsistent facets.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace bottleneck::detail {

using Int128 = __int128;

struct LiftedHull
{
  /// Every point lies on a single hyperplane.
  bool degenerate = false;
  /// Facets whose outward normal has a negative last (height) component.
  std::vector<std::vector<std::uint32_t>> lower_facets;
  std::size_t facet_count = 0;
};

/// Lower hull of `count = coords.size() / dim` points.  `base_simplex` names
/// dim points whose projections onto the first dim - 1 coordinates are
/// affinely independent.
LiftedHull lower_hull(std::span<const std::int64_t> coords, std::size_t dim,
                      std::span<const std::uint32_t> base_simplex);

/// Determinant of a k x k integer matrix (k <= 4), row-major.
Int128 determinant(std::span<const Int128> matrix, std::size_t k);

}  // namespace bottleneck::detail
