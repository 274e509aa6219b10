#pragma once

// Boundary points of the achievable region from supporting lines of slope
// lambda, curve assembly over a lambda schedule, and matched channels.
//
// Both boundaries are non-decreasing in x for every frame supported here, so
// only lambda >= 0 is swept.  The lower boundary is the convex function
// min { y : x fixed }, reached through the lower convex envelope of phi; the
// upper boundary mirrors it with the upper concave envelope.

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bottleneck/core_prob.hpp"
#include "bottleneck/envelope.hpp"
#include "bottleneck/witness.hpp"

namespace bottleneck {

enum class ProblemTag
{
  generic,
  ib,
  pf,
  eb,
  epf,
  arimoto,
};

enum class Frame
{
  raw,
  entropy_complement,
  arimoto_entropy,
  arimoto_information,
};

std::string to_string(ProblemTag tag);
std::string to_string(Frame frame);

struct BoundaryPoint
{
  /// Slope of the supporting line; NaN for the forced endpoints.
  double lambda = 0.0;
  double x = 0.0;
  double y = 0.0;
  WitnessChannel witness;
  bool trivial = false;
  /// Lattice indices of the witness atoms; empty for off-lattice atoms.
  std::vector<std::size_t> lattice_support;
  /// f or g uses P_X or P_Y as a reference measure.
  bool depends_on_marginal = false;
};

struct BoundaryCurve
{
  Direction direction = Direction::lower;
  std::vector<BoundaryPoint> points;
  ProblemTag problem = ProblemTag::generic;
  double beta = 0.0;
  Frame frame = Frame::raw;
  KernelKind x_kernel = KernelKind::entropy;
  KernelKind y_kernel = KernelKind::entropy;

  std::vector<double> xs() const;
  std::vector<double> ys() const;
};

/// Caches the lattice and the functional table for one (f, g, T, q).
class BoundarySolver
{
public:
  /// resolution = 0 picks default_resolution(m).
  BoundarySolver(SimplexFunctional f, SimplexFunctional g, Channel t, Distribution q,
                 std::size_t resolution = 0);

  const SimplexFunctional& f() const noexcept { return f_; }
  const SimplexFunctional& g() const noexcept { return g_; }
  const Channel& channel() const noexcept { return t_; }
  const Distribution& marginal() const noexcept { return q_; }
  const SimplexLattice& lattice() const noexcept { return *lattice_; }
  std::shared_ptr<const SimplexLattice> lattice_ptr() const noexcept { return lattice_; }
  bool depends_on_marginal() const noexcept
  {
    return f_.depends_on_reference() || g_.depends_on_reference();
  }

  PhiGraph graph(double lambda) const;

  /// Supporting-line point at slope lambda (trivial or non-trivial case).
  BoundaryPoint point_at_lambda(double lambda, Direction direction) const;

  /// Same as above with a query marginal other than q; f and g keep their
  /// reference measures.
  BoundaryPoint point_at_lambda(double lambda, Direction direction,
                                const Distribution& query) const;

  /// (f(q), g(Tq)) with the witness {(1, q)}.
  BoundaryPoint trivial_point() const;
  /// W = X: atoms e_i with weights q_i.  Empty when f or g is not finite at
  /// some vertex.
  std::optional<BoundaryPoint> deterministic_point() const;

  /// (x, y) recomputed from a witness.
  BoundaryPoint evaluate(const WitnessChannel& witness, double lambda) const;

  /// Geometric grid of `steps` slopes in [lambda_max 1e-4, lambda_max], plus
  /// 0 and the landmarks, sorted and deduplicated.
  std::vector<double> default_lambda_grid(std::size_t steps,
                                          std::span<const double> landmarks = {}) const;
  double lambda_max() const;

  BoundaryCurve sweep(Direction direction, std::span<const double> lambdas) const;

private:
  SimplexFunctional f_;
  SimplexFunctional g_;
  Channel t_;
  Distribution q_;
  std::shared_ptr<const SimplexLattice> lattice_;
  std::shared_ptr<const FunctionalTable> table_;
};

/// One-shot form of BoundarySolver::point_at_lambda.
BoundaryPoint boundary_point_at_lambda(const SimplexFunctional& f, const SimplexFunctional& g,
                                       const Channel& t, const Distribution& q, double lambda,
                                       Direction direction, std::size_t resolution = 0);

/// x-sorted, deduplicated curve keeping the extremal y per x, then pruned to
/// its convex (lower) or concave (upper) hull.  Collinear points are kept.
std::vector<BoundaryPoint> assemble_curve(std::vector<BoundaryPoint> points, Direction direction);

struct CurveValue
{
  double value = 0.0;
  /// x was outside the curve's domain and was clamped to it.
  bool clamped = false;
  /// Slopes of the two bracketing points.
  double lambda_left = 0.0;
  double lambda_right = 0.0;
};

/// Linear interpolation along the curve.
CurveValue interpolate_curve(const BoundaryCurve& curve, double x);
/// Upper curve: B(x).
CurveValue bottleneck_value(const BoundaryCurve& curve, double x);
/// Lower curve: F(x).
CurveValue funnel_value(const BoundaryCurve& curve, double x);

/// (x, y) -> (h(q) - x, h(Tq) - y).  Only for curves whose functionals are
/// entropies; the map is an involution.
BoundaryCurve transform_entropy_frame(const BoundaryCurve& curve, const Distribution& q,
                                      const Channel& t);

/// K-frame curve (l^beta functionals, raw frame) mapped to
/// (beta / (1 - beta)) log, which is Frame::arimoto_entropy, or further to
/// (H_beta(X) - x, H_beta(Y) - y), which is Frame::arimoto_information.  The
/// logarithm map reverses order, so arimoto_entropy swaps the direction.
BoundaryCurve transform_arimoto_frame(const BoundaryCurve& curve, const Distribution& q,
                                      const Channel& t, Frame target);

/// The witness when it has at least two atoms, else nothing.  Throws for
/// points whose functionals depend on the marginal, where matched channels
/// do not exist.
std::optional<WitnessChannel> matched_channel_extract(const BoundaryPoint& point);

struct InvarianceCheck
{
  BoundaryPoint point;
  /// (y - lambda x) minus the envelope of phi at the new marginal.
  double supporting_gap = 0.0;
  bool on_boundary = false;
};

/// Re-weights the atoms of a matched channel so that they mix to q_prime and
/// tests whether the result is still a supporting point of slope lambda.
InvarianceCheck matched_channel_invariance_check(const BoundarySolver& solver,
                                                 const BoundaryPoint& point,
                                                 const Distribution& q_prime,
                                                 Direction direction,
                                                 double tolerance = 1e-7);

}  // namespace bottleneck
