#include "bottleneck/dual_sweep.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "bottleneck/nnls.hpp"
#include "bottleneck/parallel.hpp"

namespace bottleneck {

std::string to_string(ProblemTag tag)
{
  switch (tag) {
  case ProblemTag::generic:
    return "generic";
  case ProblemTag::ib:
    return "ib";
  case ProblemTag::pf:
    return "pf";
  case ProblemTag::eb:
    return "eb";
  case ProblemTag::epf:
    return "epf";
  case ProblemTag::arimoto:
    return "arimoto";
  }
  return "generic";
}

std::string to_string(Frame frame)
{
  switch (frame) {
  case Frame::raw:
    return "raw";
  case Frame::entropy_complement:
    return "entropy_complement";
  case Frame::arimoto_entropy:
    return "arimoto_entropy";
  case Frame::arimoto_information:
    return "arimoto_information";
  }
  return "raw";
}

std::vector<double> BoundaryCurve::xs() const
{
  std::vector<double> v;
  v.reserve(points.size());
  for (const auto& p : points)
    v.push_back(p.x);
  return v;
}

std::vector<double> BoundaryCurve::ys() const
{
  std::vector<double> v;
  v.reserve(points.size());
  for (const auto& p : points)
    v.push_back(p.y);
  return v;
}

// ------------------------------------------------------------------ solver

BoundarySolver::BoundarySolver(SimplexFunctional f, SimplexFunctional g, Channel t, Distribution q,
                               std::size_t resolution)
    : f_(std::move(f)), g_(std::move(g)), t_(std::move(t)), q_(std::move(q))
{
  if (t_.inputs() != q_.size())
    throw std::invalid_argument("BoundarySolver: channel inputs differ from the marginal size");
  const std::size_t m = q_.size();
  if (resolution == 0)
    resolution = default_resolution(m);
  else if (m > 4)
    throw std::invalid_argument("envelopes are limited to alphabets of size 2..4");
  lattice_ = std::make_shared<const SimplexLattice>(m, resolution);
  table_ = std::make_shared<const FunctionalTable>(evaluate_functionals(f_, g_, t_, *lattice_));
}

PhiGraph BoundarySolver::graph(double lambda) const
{
  return phi_graph_from_table(table_, lambda, lattice_);
}

BoundaryPoint BoundarySolver::point_at_lambda(double lambda, Direction direction) const
{
  return point_at_lambda(lambda, direction, q_);
}

BoundaryPoint BoundarySolver::point_at_lambda(double lambda, Direction direction,
                                              const Distribution& query) const
{
  if (!std::isfinite(lambda))
    throw std::invalid_argument("point_at_lambda: lambda must be finite");
  if (query.size() != q_.size())
    throw std::invalid_argument("point_at_lambda: query on a different alphabet");
  const PhiGraph phi = graph(lambda);
  const EnvelopeResult env = compute_envelope(phi, direction);

  const double fq = f_(query);
  const double gq = g_(t_.apply(query));
  const double phi_q = gq - lambda * fq;
  const auto support = envelope_support_at(env, phi, query.probs());
  if (!support)
    throw std::logic_error("point_at_lambda: no envelope facet covers the query");
  const double gap =
      direction == Direction::lower ? phi_q - support->value : support->value - phi_q;

  BoundaryPoint out{.lambda = lambda,
                    .x = fq,
                    .y = gq,
                    .witness = WitnessChannel::trivial(query),
                    .trivial = true,
                    .lattice_support = {},
                    .depends_on_marginal = depends_on_marginal()};
  if (gap <= kTrivialGapTolerance || support->indices.size() < 2)
    return out;

  std::vector<WitnessChannel::Atom> atoms;
  double x = 0.0;
  double y = 0.0;
  for (std::size_t k = 0; k < support->indices.size(); ++k) {
    const std::size_t i = support->indices[k];
    const double w = support->weights[k];
    atoms.emplace_back(w, lattice_->distribution(i));
    x += w * table_->x_values[i];
    y += w * table_->y_values[i];
  }
  out.witness = WitnessChannel(std::move(atoms), query);
  out.x = x;
  out.y = y;
  out.trivial = false;
  out.lattice_support = support->indices;
  return out;
}

BoundaryPoint BoundarySolver::trivial_point() const
{
  BoundaryPoint p{.lambda = std::numeric_limits<double>::quiet_NaN(),
                  .x = f_(q_),
                  .y = g_(t_.apply(q_)),
                  .witness = WitnessChannel::trivial(q_),
                  .trivial = true,
                  .lattice_support = {},
                  .depends_on_marginal = depends_on_marginal()};
  return p;
}

std::optional<BoundaryPoint> BoundarySolver::deterministic_point() const
{
  const std::size_t m = q_.size();
  std::vector<WitnessChannel::Atom> atoms;
  std::vector<std::size_t> support;
  for (std::size_t i = 0; i < m; ++i) {
    if (q_[i] <= 0.0)
      continue;
    atoms.emplace_back(q_[i], Distribution::vertex(m, i));
    support.push_back(lattice_->vertex_index(i));
  }
  if (atoms.size() < 2)
    return std::nullopt;
  try {
    WitnessChannel w(std::move(atoms), q_);
    BoundaryPoint p = evaluate(w, std::numeric_limits<double>::quiet_NaN());
    if (!std::isfinite(p.x) || !std::isfinite(p.y))
      return std::nullopt;
    p.lattice_support = std::move(support);
    return p;
  } catch (const AbsoluteContinuityError&) {
    return std::nullopt;
  }
}

BoundaryPoint BoundarySolver::evaluate(const WitnessChannel& witness, double lambda) const
{
  BoundaryPoint p{.lambda = lambda,
                  .x = witness.expectation([&](const Distribution& d) { return f_(d); }),
                  .y = witness.expectation([&](const Distribution& d) { return g_(t_.apply(d)); }),
                  .witness = witness,
                  .trivial = witness.size() == 1,
                  .lattice_support = {},
                  .depends_on_marginal = depends_on_marginal()};
  return p;
}

double BoundarySolver::lambda_max() const
{
  const double fq = f_(q_);
  const double gq = g_(t_.apply(q_));
  double best = 0.0;
  for (std::size_t i = 0; i < q_.size(); ++i) {
    const std::size_t v = lattice_->vertex_index(i);
    const double dx = table_->x_values[v] - fq;
    const double dy = table_->y_values[v] - gq;
    if (std::abs(dx) > 1e-15 && std::isfinite(dy / dx))
      best = std::max(best, std::abs(dy / dx));
  }
  return best > 0.0 ? 2.0 * best : 1.0;
}

std::vector<double> BoundarySolver::default_lambda_grid(std::size_t steps,
                                                        std::span<const double> landmarks) const
{
  if (steps == 0)
    throw std::invalid_argument("default_lambda_grid: at least one step required");
  const double hi = lambda_max();
  const double lo = hi * 1e-4;
  std::vector<double> grid{0.0};
  if (steps == 1) {
    grid.push_back(hi);
  } else {
    const double ratio = std::log(hi / lo) / static_cast<double>(steps - 1);
    for (std::size_t k = 0; k < steps; ++k)
      grid.push_back(lo * std::exp(ratio * static_cast<double>(k)));
  }
  for (double l : landmarks)
    if (std::isfinite(l) && l >= 0.0)
      grid.push_back(l);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

BoundaryCurve BoundarySolver::sweep(Direction direction, std::span<const double> lambdas) const
{
  if (lambdas.empty())
    throw std::invalid_argument("sweep: empty lambda grid");
  std::vector<double> grid(lambdas.begin(), lambdas.end());
  for (double l : grid)
    if (!std::isfinite(l))
      throw std::invalid_argument("sweep: lambda grid must be finite");
  std::sort(grid.begin(), grid.end());

  std::vector<std::optional<BoundaryPoint>> slots(grid.size());
  parallel_for(grid.size(), [&](std::size_t k) { slots[k] = point_at_lambda(grid[k], direction); });

  std::vector<BoundaryPoint> points;
  points.reserve(grid.size() + 2);
  points.push_back(trivial_point());
  if (auto det = deterministic_point())
    points.push_back(std::move(*det));
  for (auto& s : slots)
    points.push_back(std::move(*s));

  BoundaryCurve curve;
  curve.direction = direction;
  curve.points = assemble_curve(std::move(points), direction);
  curve.x_kernel = f_.kernel().kind();
  curve.y_kernel = g_.kernel().kind();
  if (curve.x_kernel == KernelKind::norm_beta)
    curve.beta = f_.kernel().beta();
  return curve;
}

BoundaryPoint boundary_point_at_lambda(const SimplexFunctional& f, const SimplexFunctional& g,
                                       const Channel& t, const Distribution& q, double lambda,
                                       Direction direction, std::size_t resolution)
{
  return BoundarySolver(f, g, t, q, resolution).point_at_lambda(lambda, direction);
}

// --------------------------------------------------------------- assembly

std::vector<BoundaryPoint> assemble_curve(std::vector<BoundaryPoint> points, Direction direction)
{
  const bool lower = direction == Direction::lower;
  auto lam = [](const BoundaryPoint& p) {
    return std::isnan(p.lambda) ? std::numeric_limits<double>::infinity() : p.lambda;
  };
  std::stable_sort(points.begin(), points.end(), [&](const BoundaryPoint& a, const BoundaryPoint& b) {
    if (a.x != b.x)
      return a.x < b.x;
    if (a.y != b.y)
      return lower ? a.y < b.y : a.y > b.y;
    return lam(a) < lam(b);
  });

  // Duplicate x: the first entry of each run is already extremal.
  std::vector<BoundaryPoint> unique;
  for (auto& p : points) {
    if (!unique.empty() && std::abs(p.x - unique.back().x) <= 1e-12) {
      const bool better = lower ? p.y < unique.back().y : p.y > unique.back().y;
      if (better)
        unique.back() = std::move(p);
      continue;
    }
    unique.push_back(std::move(p));
  }

  double scale = 1.0;
  for (const auto& p : unique)
    scale = std::max({scale, std::abs(p.x), std::abs(p.y)});
  const double tol = 1e-12 * scale * scale;
  const double sign = lower ? 1.0 : -1.0;

  std::vector<BoundaryPoint> hull;
  for (auto& p : unique) {
    while (hull.size() >= 2) {
      const auto& a = hull[hull.size() - 2];
      const auto& b = hull.back();
      // Cross product of (b - a) and (p - a); for the lower chain b must not
      // lie strictly above the chord a-p.
      const double cross = (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x);
      if (sign * cross < -tol)
        hull.pop_back();
      else
        break;
    }
    hull.push_back(std::move(p));
  }
  return hull;
}

CurveValue interpolate_curve(const BoundaryCurve& curve, double x)
{
  const auto& pts = curve.points;
  if (pts.empty())
    throw std::invalid_argument("interpolate_curve: empty curve");
  CurveValue out;
  if (x <= pts.front().x) {
    out.clamped = x < pts.front().x - 1e-12;
    out.value = pts.front().y;
    out.lambda_left = out.lambda_right = pts.front().lambda;
    return out;
  }
  if (x >= pts.back().x) {
    out.clamped = x > pts.back().x + 1e-12;
    out.value = pts.back().y;
    out.lambda_left = out.lambda_right = pts.back().lambda;
    return out;
  }
  const auto it = std::upper_bound(pts.begin(), pts.end(), x,
                                   [](double v, const BoundaryPoint& p) { return v < p.x; });
  const auto& b = *it;
  const auto& a = *(it - 1);
  const double t = (x - a.x) / (b.x - a.x);
  out.value = a.y + t * (b.y - a.y);
  out.lambda_left = a.lambda;
  out.lambda_right = b.lambda;
  return out;
}

CurveValue bottleneck_value(const BoundaryCurve& curve, double x)
{
  if (curve.direction != Direction::upper)
    throw std::invalid_argument("bottleneck_value: requires an upper boundary curve");
  return interpolate_curve(curve, x);
}

CurveValue funnel_value(const BoundaryCurve& curve, double x)
{
  if (curve.direction != Direction::lower)
    throw std::invalid_argument("funnel_value: requires a lower boundary curve");
  return interpolate_curve(curve, x);
}

BoundaryCurve transform_entropy_frame(const BoundaryCurve& curve, const Distribution& q,
                                      const Channel& t)
{
  if (curve.x_kernel != KernelKind::entropy || curve.y_kernel != KernelKind::entropy)
    throw std::invalid_argument("transform_entropy_frame: curve functionals are not entropies");
  if (curve.frame != Frame::raw && curve.frame != Frame::entropy_complement)
    throw std::invalid_argument("transform_entropy_frame: curve is in an Arimoto frame");
  const double hx = entropy(q);
  const double hy = entropy(t.apply(q));
  BoundaryCurve out = curve;
  for (auto& p : out.points) {
    p.x = hx - p.x;
    p.y = hy - p.y;
  }
  std::reverse(out.points.begin(), out.points.end());
  out.frame = curve.frame == Frame::raw ? Frame::entropy_complement : Frame::raw;
  out.direction = curve.direction == Direction::lower ? Direction::upper : Direction::lower;
  return out;
}

BoundaryCurve transform_arimoto_frame(const BoundaryCurve& curve, const Distribution& q,
                                      const Channel& t, Frame target)
{
  if (curve.x_kernel != KernelKind::norm_beta || curve.y_kernel != KernelKind::norm_beta)
    throw std::invalid_argument("transform_arimoto_frame: curve functionals are not l^beta norms");
  if (curve.frame != Frame::raw)
    throw std::invalid_argument("transform_arimoto_frame: curve is not in the K-frame");
  if (target == Frame::raw)
    return curve;
  if (target != Frame::arimoto_entropy && target != Frame::arimoto_information)
    throw std::invalid_argument("transform_arimoto_frame: unsupported target frame");
  const double beta = curve.beta;
  const double c = beta / (1.0 - beta);
  const double hx = c * std::log(arimoto_K(beta, q.probs()));
  const double hy = c * std::log(arimoto_K(beta, t.apply(q.probs())));
  BoundaryCurve out = curve;
  for (auto& p : out.points) {
    p.x = c * std::log(p.x);
    p.y = c * std::log(p.y);
    if (target == Frame::arimoto_information) {
      p.x = hx - p.x;
      p.y = hy - p.y;
    }
  }
  if (target == Frame::arimoto_entropy) {
    std::reverse(out.points.begin(), out.points.end());
    out.direction = curve.direction == Direction::lower ? Direction::upper : Direction::lower;
  }
  out.frame = target;
  return out;
}

std::optional<WitnessChannel> matched_channel_extract(const BoundaryPoint& point)
{
  if (point.depends_on_marginal)
    throw std::invalid_argument(
        "matched_channel_extract: matched channels do not exist when f or g is measured "
        "against the marginal (f-information frames)");
  if (point.witness.size() < 2)
    return std::nullopt;
  return point.witness;
}

InvarianceCheck matched_channel_invariance_check(const BoundarySolver& solver,
                                                 const BoundaryPoint& point,
                                                 const Distribution& q_prime,
                                                 Direction direction, double tolerance)
{
  if (solver.depends_on_marginal() || point.depends_on_marginal)
    throw std::invalid_argument(
        "matched_channel_invariance_check: functionals depend on the marginal");
  if (point.witness.size() < 2)
    throw std::invalid_argument("matched_channel_invariance_check: a matched channel needs |W| >= 2");
  if (!std::isfinite(point.lambda))
    throw std::invalid_argument("matched_channel_invariance_check: point has no supporting slope");

  const auto atoms = point.witness.conditionals();
  const auto weights = barycentric_weights(atoms, q_prime);
  if (!weights)
    throw std::domain_error(
        "matched_channel_invariance_check: q_prime is outside the hull of the witness atoms");
  std::vector<WitnessChannel::Atom> reweighted;
  for (std::size_t i = 0; i < atoms.size(); ++i)
    reweighted.emplace_back((*weights)[i], atoms[i]);

  InvarianceCheck out{.point = solver.evaluate(WitnessChannel(std::move(reweighted), q_prime),
                                               point.lambda),
                      .supporting_gap = 0.0,
                      .on_boundary = false};
  out.point.lattice_support = point.lattice_support;

  const PhiGraph phi = solver.graph(point.lambda);
  const EnvelopeResult env = compute_envelope(phi, direction);
  const auto value = envelope_value_at(env, phi, q_prime.probs());
  if (!value)
    throw std::logic_error("matched_channel_invariance_check: no envelope facet covers q_prime");
  out.supporting_gap = (out.point.y - point.lambda * out.point.x) - *value;
  out.on_boundary = std::abs(out.supporting_gap) <= tolerance;
  return out;
}

}  // namespace bottleneck
