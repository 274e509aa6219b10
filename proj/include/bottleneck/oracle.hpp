#pragma once

// Brute-force boundary values by direct search over witnesses W.  Lower
// direction: min y subject to x >= x_target.  Upper: max y subject to
// x <= x_target.  Every search space contains the trivial witness {(1, q)}.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "bottleneck/core_prob.hpp"
#include "bottleneck/envelope.hpp"
#include "bottleneck/witness.hpp"

namespace bottleneck {

struct OracleConfig
{
  /// Atoms per witness, at most m + 1.
  std::size_t atom_budget = 3;
  /// Atoms are compositions with this denominator.
  std::size_t grid_resolution = 512;
  /// Seeded random starts, each refined by a local search over the atom
  /// grid (m >= 3 only).
  std::size_t restarts = 512;
  std::uint64_t seed = 7;
  /// Slack on the x constraint.
  double tolerance = 1e-9;
};

struct OracleResult
{
  double x_target = 0.0;
  Direction direction = Direction::lower;
  double best_y = 0.0;
  /// x of the returned witness.
  double best_x = 0.0;
  /// False when no searched witness met the constraint; the witness is then
  /// the trivial one.
  bool feasible = false;
  WitnessChannel witness;
  std::size_t budget = 0;
  std::size_t resolution = 0;
  std::uint64_t seed = 0;
};

/// Full atom grid for m = 2, seeded random starts with local search for
/// m >= 3.
OracleResult oracle_boundary(const SimplexFunctional& f, const SimplexFunctional& g,
                             const Channel& t, const Distribution& q, double x_target,
                             Direction direction, const OracleConfig& cfg);

/// m = 2 exhaustive search with atoms i / resolution.  Budget 2 scans every
/// pair p1 < q < p2; budget 3 adds every three-atom witness, found as
/// segments between two-atom witnesses sharing an atom.
std::vector<OracleResult> oracle_exhaustive(const SimplexFunctional& f,
                                            const SimplexFunctional& g, const Channel& t,
                                            const Distribution& q,
                                            std::span<const double> x_grid, Direction direction,
                                            std::size_t resolution, std::size_t budget = 3,
                                            double tolerance = 1e-9);

/// oracle_exhaustive on X ~ Bernoulli(q) through BSC(delta).
std::vector<OracleResult> oracle_exhaustive_binary(const SimplexFunctional& f,
                                                   const SimplexFunctional& g, double delta,
                                                   double q, std::span<const double> x_grid,
                                                   Direction direction, std::size_t resolution,
                                                   std::size_t budget = 3,
                                                   double tolerance = 1e-9);

}  // namespace bottleneck
