#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>

#include "bottleneck/closed_forms.hpp"
#include "bottleneck/dual_sweep.hpp"
#include "bottleneck/oracle.hpp"

using namespace bottleneck;

namespace {

constexpr double kQ = 0.1;
constexpr double kDelta = 0.1;

BoundarySolver entropy_solver(double q = kQ, double delta = kDelta, std::size_t n = 4096)
{
  return BoundarySolver(SimplexFunctional::entropy(), SimplexFunctional::entropy(),
                        Channel::binary_symmetric(delta), Distribution::bernoulli(q), n);
}

BoundarySolver chi2_solver(const Distribution& q, const Channel& t, std::size_t n)
{
  return BoundarySolver(
      SimplexFunctional::divergence_from(DivergenceKernel::chi_squared(), q),
      SimplexFunctional::divergence_from(DivergenceKernel::chi_squared(), t.apply(q)), t, q, n);
}

const Distribution kTernaryQ({0.5, 0.3, 0.2});
const Channel kTernaryT =
    Channel::from_rows({{0.7, 0.2, 0.1}, {0.2, 0.6, 0.3}, {0.1, 0.2, 0.6}});

double h_bits(double p) { return binary_entropy(p); }

}  // namespace

TEST(PointAtLambda, ConvexRegimeIsTrivial)
{
  const BoundarySolver s = entropy_solver();
  // The MGL slope at x = h(q) is (1 - 2 delta) ln((1 - q*delta) / (q*delta)) / ln((1 - q) / q),
  // about 0.552 here; steeper supporting lines only touch the trivial point.
  for (double lambda : {0.6, (1.0 - 2.0 * kDelta) * (1.0 - 2.0 * kDelta), 0.9}) {
    const BoundaryPoint p = s.point_at_lambda(lambda, Direction::lower);
    EXPECT_TRUE(p.trivial);
    EXPECT_NEAR(nats_to_bits(p.x), h_bits(kQ), 1e-12);
    EXPECT_NEAR(nats_to_bits(p.y), h_bits(star(kQ, kDelta)), 1e-12);
    EXPECT_EQ(p.witness.size(), 1u);
  }
}

TEST(PointAtLambda, MglWitnessIsBscOfInverseEntropy)
{
  const BoundarySolver s = entropy_solver();
  for (double lambda : {0.2, 0.35, 0.5}) {
    const BoundaryPoint p = s.point_at_lambda(lambda, Direction::lower);
    ASSERT_FALSE(p.trivial) << lambda;
    ASSERT_EQ(p.witness.size(), 2u);
    const double r = binary_entropy_inv(nats_to_bits(p.x));
    double lo = p.witness.atoms()[0].second[1];
    double hi = p.witness.atoms()[1].second[1];
    if (lo > hi)
      std::swap(lo, hi);
    EXPECT_NEAR(lo, r, 2.0 / 4096) << lambda;
    EXPECT_NEAR(hi, 1.0 - r, 2.0 / 4096) << lambda;
    EXPECT_NEAR(nats_to_bits(p.y), mgl(BscInstance(kQ, kDelta), nats_to_bits(p.x)), 1e-5);
  }
}

TEST(PointAtLambda, ZeroSlopeUpperMaximizesG)
{
  const BoundarySolver s = chi2_solver(kTernaryQ, kTernaryT, 96);
  const BoundaryPoint p = s.point_at_lambda(0.0, Direction::upper);
  OracleConfig cfg;
  cfg.grid_resolution = 48;
  cfg.restarts = 128;
  const OracleResult o = oracle_boundary(s.f(), s.g(), kTernaryT, kTernaryQ, p.x + 1e-12,
                                         Direction::upper, cfg);
  ASSERT_TRUE(o.feasible);
  EXPECT_LE(o.best_y, p.y + 1e-9);
  EXPECT_GE(o.best_y, p.y - 5e-3);
}

TEST(PointAtLambda, WitnessMixesToMarginal)
{
  const BoundarySolver s = chi2_solver(kTernaryQ, kTernaryT, 64);
  for (double lambda : {0.05, 0.2, 0.4}) {
    for (Direction d : {Direction::lower, Direction::upper}) {
      const BoundaryPoint p = s.point_at_lambda(lambda, d);
      std::vector<double> mix(3, 0.0);
      for (const auto& [w, atom] : p.witness.atoms())
        for (std::size_t j = 0; j < 3; ++j)
          mix[j] += w * atom[j];
      for (std::size_t j = 0; j < 3; ++j)
        EXPECT_NEAR(mix[j], kTernaryQ[j], 1e-9);
      const BoundaryPoint again = s.evaluate(p.witness, lambda);
      EXPECT_NEAR(again.x, p.x, 1e-12);
      EXPECT_NEAR(again.y, p.y, 1e-12);
    }
  }
}

TEST(Sweep, CurvesAreSortedAndShaped)
{
  const BoundarySolver s = chi2_solver(kTernaryQ, kTernaryT, 64);
  const auto grid = s.default_lambda_grid(64);
  EXPECT_TRUE(std::is_sorted(grid.begin(), grid.end()));
  EXPECT_EQ(grid.front(), 0.0);
  for (Direction d : {Direction::lower, Direction::upper}) {
    const BoundaryCurve c = s.sweep(d, grid);
    const double sign = d == Direction::lower ? 1.0 : -1.0;
    ASSERT_GE(c.points.size(), 3u);
    for (std::size_t i = 1; i < c.points.size(); ++i)
      EXPECT_GT(c.points[i].x, c.points[i - 1].x);
    for (std::size_t i = 1; i + 1 < c.points.size(); ++i) {
      const auto& a = c.points[i - 1];
      const auto& b = c.points[i];
      const auto& e = c.points[i + 1];
      const double s1 = (b.y - a.y) / (b.x - a.x);
      const double s2 = (e.y - b.y) / (e.x - b.x);
      EXPECT_LE(sign * (s1 - s2), 1e-9);
    }
    EXPECT_NEAR(c.points.front().x, 0.0, 1e-12);
    EXPECT_NEAR(c.points.back().x, 2.0, 1e-12);
  }
}

TEST(Sweep, DeterministicAcrossWorkerCounts)
{
  const BoundarySolver s = chi2_solver(kTernaryQ, kTernaryT, 40);
  const auto grid = s.default_lambda_grid(32);
  ::setenv("BOTTLENECK_LAB_THREADS", "1", 1);
  const BoundaryCurve one = s.sweep(Direction::upper, grid);
  ::setenv("BOTTLENECK_LAB_THREADS", "3", 1);
  const BoundaryCurve three = s.sweep(Direction::upper, grid);
  ::unsetenv("BOTTLENECK_LAB_THREADS");
  ASSERT_EQ(one.points.size(), three.points.size());
  for (std::size_t i = 0; i < one.points.size(); ++i) {
    EXPECT_EQ(one.points[i].x, three.points[i].x);
    EXPECT_EQ(one.points[i].y, three.points[i].y);
    EXPECT_EQ(one.points[i].witness.to_json(), three.points[i].witness.to_json());
  }
}

TEST(Sweep, BinaryChiSquaredRegionIsASegment)
{
  const double q = 0.1, d = 0.1;
  const BoundarySolver s = chi2_solver(Distribution::bernoulli(q), Channel::binary_symmetric(d), 1024);
  const double t = star(q, d);
  const double slope = (1.0 - 2.0 * d) * (1.0 - 2.0 * d) * q * (1.0 - q) / (t * (1.0 - t));
  const auto grid = s.default_lambda_grid(32);
  for (Direction dir : {Direction::lower, Direction::upper})
    for (const auto& p : s.sweep(dir, grid).points)
      EXPECT_NEAR(p.y, slope * p.x, 1e-12);
}

TEST(AssembleCurve, DedupesAndKeepsHull)
{
  const Distribution q({0.5, 0.5});
  auto point = [&](double x, double y) {
    BoundaryPoint p{.lambda = 0.0, .x = x, .y = y, .witness = WitnessChannel::trivial(q)};
    return p;
  };
  const auto lower = assemble_curve(
      {point(1.0, 1.0), point(0.0, 0.0), point(0.5, 0.6), point(0.5, 0.4), point(0.25, 0.2)},
      Direction::lower);
  ASSERT_EQ(lower.size(), 4u);
  EXPECT_EQ(lower[2].x, 0.5);
  EXPECT_EQ(lower[2].y, 0.4);
  const auto upper = assemble_curve(
      {point(1.0, 1.0), point(0.0, 0.0), point(0.5, 0.6), point(0.5, 0.4), point(0.25, 0.2)},
      Direction::upper);
  ASSERT_EQ(upper.size(), 3u);
  EXPECT_EQ(upper[1].y, 0.6);
}

TEST(CurveValues, InformationFrameEndpointsAndClosedForms)
{
  const BoundarySolver s = entropy_solver();
  const double landmark[1] = {(1.0 - 2.0 * kDelta) * (1.0 - 2.0 * kDelta)};
  const auto grid = s.default_lambda_grid(256, landmark);
  const Distribution q = s.marginal();
  const BoundaryCurve ib = transform_entropy_frame(s.sweep(Direction::lower, grid), q, s.channel());
  const BoundaryCurve pf = transform_entropy_frame(s.sweep(Direction::upper, grid), q, s.channel());
  ASSERT_EQ(ib.direction, Direction::upper);
  ASSERT_EQ(pf.direction, Direction::lower);
  const double hq = h_bits(kQ);
  const double ixy = h_bits(star(kQ, kDelta)) - h_bits(kDelta);
  const BscInstance inst(kQ, kDelta);
  EXPECT_NEAR(bottleneck_value(ib, 0.0).value, 0.0, 1e-12);
  EXPECT_NEAR(nats_to_bits(bottleneck_value(ib, bits_to_nats(hq)).value), ixy, 1e-9);
  for (double x : {0.05, 0.2, 0.35}) {
    const double b = nats_to_bits(bottleneck_value(ib, bits_to_nats(x)).value);
    EXPECT_NEAR(b, h_bits(star(kQ, kDelta)) - mgl(inst, hq - x), 2e-3) << x;
    const double f = nats_to_bits(funnel_value(pf, bits_to_nats(x)).value);
    EXPECT_NEAR(f, h_bits(star(kQ, kDelta)) - mr_gerber(inst, hq - x), 2e-3) << x;
  }
  EXPECT_THROW(bottleneck_value(pf, 0.1), std::invalid_argument);
  EXPECT_THROW(funnel_value(ib, 0.1), std::invalid_argument);
  EXPECT_TRUE(bottleneck_value(ib, 5.0).clamped);
}

TEST(CurveValues, FunnelPositivityIsReported)
{
  // Perfect privacy: whether the funnel is zero near x = 0.  For BSC(0.1)
  // with q = 0.1 the computed funnel is strictly positive.
  const BoundarySolver s = entropy_solver();
  const BoundaryCurve pf = transform_entropy_frame(
      s.sweep(Direction::upper, s.default_lambda_grid(256)), s.marginal(), s.channel());
  const double x = bits_to_nats(0.02);
  const double f = funnel_value(pf, x).value;
  RecordProperty("funnel_at_0.02_bits", std::to_string(nats_to_bits(f)));
  EXPECT_GT(f, 0.0);
  const auto o = oracle_exhaustive_binary(SimplexFunctional::entropy(), SimplexFunctional::entropy(),
                                          kDelta, kQ, std::vector<double>{bits_to_nats(h_bits(kQ) - 0.02)},
                                          Direction::upper, 512);
  const double oracle_f = entropy(s.channel().apply(s.marginal())) - o[0].best_y;
  EXPECT_GE(oracle_f, f - 1e-3);
}

TEST(CurveValues, ChiSquaredFunnelEndpoint)
{
  const BoundarySolver s = chi2_solver(kTernaryQ, kTernaryT, 64);
  const BoundaryCurve lower = s.sweep(Direction::lower, s.default_lambda_grid(64));
  const double chi = f_information(DivergenceKernel::chi_squared(),
                                   JointDistribution::from_marginal_channel(kTernaryQ, kTernaryT));
  EXPECT_NEAR(funnel_value(lower, 2.0).value, chi, 1e-12);
  EXPECT_NEAR(funnel_value(lower, 0.0).value, 0.0, 1e-12);
}

TEST(EntropyFrame, MapsEndpointsAndIsAnInvolution)
{
  const BoundarySolver s = entropy_solver(kQ, kDelta, 1024);
  const BoundaryCurve raw = s.sweep(Direction::lower, s.default_lambda_grid(64));
  const BoundaryCurve info = transform_entropy_frame(raw, s.marginal(), s.channel());
  // Trivial point (h(q), h(q * delta)) -> (0, 0); W = X point (0, h(delta)) -> (H(X), I(X;Y)).
  EXPECT_NEAR(info.points.front().x, 0.0, 1e-12);
  EXPECT_NEAR(info.points.front().y, 0.0, 1e-12);
  EXPECT_NEAR(nats_to_bits(info.points.back().x), h_bits(kQ), 1e-12);
  EXPECT_NEAR(nats_to_bits(info.points.back().y), h_bits(star(kQ, kDelta)) - h_bits(kDelta), 1e-12);
  const BoundaryCurve back = transform_entropy_frame(info, s.marginal(), s.channel());
  ASSERT_EQ(back.points.size(), raw.points.size());
  EXPECT_EQ(back.direction, raw.direction);
  EXPECT_EQ(back.frame, raw.frame);
  for (std::size_t i = 0; i < raw.points.size(); ++i) {
    EXPECT_NEAR(back.points[i].x, raw.points[i].x, 1e-15);
    EXPECT_NEAR(back.points[i].y, raw.points[i].y, 1e-15);
  }
}

TEST(ArimotoFrame, DirectionsAndValues)
{
  const BscInstance inst(0.4, 0.2);
  const BoundarySolver s(SimplexFunctional::norm(2.0), SimplexFunctional::norm(2.0),
                         inst.channel(), inst.marginal(), 1024);
  const BoundaryCurve k = s.sweep(Direction::lower, s.default_lambda_grid(64));
  const BoundaryCurve h = transform_arimoto_frame(k, inst.marginal(), inst.channel(),
                                                  Frame::arimoto_entropy);
  EXPECT_EQ(h.direction, Direction::upper);
  EXPECT_NEAR(h.points.front().x, 0.0, 1e-12);
  const BoundaryCurve i = transform_arimoto_frame(k, inst.marginal(), inst.channel(),
                                                  Frame::arimoto_information);
  EXPECT_EQ(i.direction, Direction::lower);
  EXPECT_NEAR(i.points.front().x, 0.0, 1e-12);
  EXPECT_NEAR(i.points.front().y, 0.0, 1e-12);
  EXPECT_THROW(transform_entropy_frame(k, inst.marginal(), inst.channel()), std::invalid_argument);
}

TEST(MatchedChannel, Extraction)
{
  const BoundarySolver s = entropy_solver();
  const auto w = matched_channel_extract(s.point_at_lambda(0.5, Direction::lower));
  ASSERT_TRUE(w.has_value());
  EXPECT_EQ(w->size(), 2u);
  EXPECT_FALSE(matched_channel_extract(s.trivial_point()).has_value());

  const BscInstance inst(0.4, 0.2);
  const BoundarySolver ar(SimplexFunctional::norm(2.0), SimplexFunctional::norm(2.0),
                          inst.channel(), inst.marginal(), 2048);
  const BoundaryCurve lower = ar.sweep(Direction::lower, ar.default_lambda_grid(64));
  const auto mid = std::find_if(lower.points.begin(), lower.points.end(),
                                [](const BoundaryPoint& p) { return !p.trivial && p.witness.size() >= 2; });
  ASSERT_NE(mid, lower.points.end());
  const auto aw = matched_channel_extract(*mid);
  ASSERT_TRUE(aw.has_value());
  EXPECT_EQ(aw->size(), 2u);
  // {p, 1 - p}: a symmetric pair.
  EXPECT_NEAR(aw->atoms()[0].second[1] + aw->atoms()[1].second[1], 1.0, 2.0 / 2048);

  const BoundarySolver kl = chi2_solver(kTernaryQ, kTernaryT, 16);
  EXPECT_THROW(matched_channel_extract(kl.point_at_lambda(0.3, Direction::upper)),
               std::invalid_argument);
}

TEST(MatchedChannel, InvarianceUnderMarginalShift)
{
  const BoundarySolver s = entropy_solver();
  const BoundaryPoint p = s.point_at_lambda(0.5, Direction::lower);
  ASSERT_EQ(p.witness.size(), 2u);

  const InvarianceCheck same = matched_channel_invariance_check(s, p, s.marginal(), Direction::lower);
  EXPECT_TRUE(same.on_boundary);
  EXPECT_NEAR(same.point.x, p.x, 1e-12);
  EXPECT_NEAR(same.point.y, p.y, 1e-12);

  const Distribution moved = Distribution::bernoulli(0.11);
  const InvarianceCheck shifted = matched_channel_invariance_check(s, p, moved, Direction::lower);
  EXPECT_TRUE(shifted.on_boundary);
  const BoundarySolver fresh = entropy_solver(0.11);
  const BoundaryPoint again = fresh.point_at_lambda(0.5, Direction::lower);
  EXPECT_TRUE(shifted.point.witness.same_atoms(again.witness));
  EXPECT_NEAR(shifted.point.x, again.x, 1e-6);
  EXPECT_NEAR(shifted.point.y, again.y, 1e-6);

  EXPECT_THROW(matched_channel_invariance_check(s, s.trivial_point(), moved, Direction::lower),
               std::invalid_argument);
}
