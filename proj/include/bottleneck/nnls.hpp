#pragma once

// Lawson-Hanson nonnegative least squares, and the barycentric weights of a
// point with respect to a set of atoms.

#include <optional>
#include <span>
#include <vector>

#include "bottleneck/core_prob.hpp"

namespace bottleneck {

struct NnlsResult
{
  std::vector<double> x;
  double residual = 0.0;
  bool converged = true;
};

/// min ||A x - b||_2 subject to x >= 0.  A is rows x cols, row-major.
NnlsResult nnls(std::span<const double> a, std::size_t rows, std::size_t cols,
                std::span<const double> b);

/// Nonnegative weights with sum_i w_i atoms_i = target and sum_i w_i = 1, or
/// nothing when the residual exceeds `max_residual`.
std::optional<std::vector<double>> barycentric_weights(std::span<const Distribution> atoms,
                                                       const Distribution& target,
                                                       double max_residual = 1e-9);

}  // namespace bottleneck
