#include <gtest/gtest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "bottleneck/core_prob.hpp"
#include "bottleneck/nnls.hpp"
#include "bottleneck/witness.hpp"

using namespace bottleneck;

namespace {

long double series_atanh_log(long double x)
{
  const long double z = (x - 1.0L) / (x + 1.0L);
  const long double z2 = z * z;
  long double term = z;
  long double sum = 0.0L;
  for (int k = 1; k < 4000; k += 2) {
    sum += term / k;
    term *= z2;
    if (std::fabs(term) < 1e-30L)
      break;
  }
  return 2.0L * sum;
}

// ln x = e ln 2 + ln m with m in [1/2, 1), each via 2 atanh((y - 1) / (y + 1))
// summed in long double.
long double series_log(long double x)
{
  int e = 0;
  const long double m = std::frexp(x, &e);
  return e * series_atanh_log(2.0L) + series_atanh_log(m);
}

long double series_binary_entropy_bits(long double p)
{
  long double h = 0.0L;
  if (p > 0.0L)
    h -= p * series_log(p);
  if (p < 1.0L)
    h -= (1.0L - p) * series_log(1.0L - p);
  return h / series_log(2.0L);
}

long double bisect_inverse(long double y)
{
  long double lo = 0.0L, hi = 0.5L;
  for (int i = 0; i < 200; ++i) {
    const long double mid = 0.5L * (lo + hi);
    (series_binary_entropy_bits(mid) < y ? lo : hi) = mid;
  }
  return 0.5L * (lo + hi);
}

}  // namespace

TEST(Entropy, UniformAndPointMass)
{
  EXPECT_NEAR(entropy(Distribution({0.5, 0.5})), std::log(2.0), 1e-15);
  EXPECT_EQ(entropy(Distribution({1.0, 0.0})), 0.0);
}

TEST(Entropy, MatchesSeriesOracle)
{
  for (double p : {0.1, 0.011, 0.37, 0.5, 0.93}) {
    const double h = nats_to_bits(entropy(Distribution({p, 1.0 - p})));
    EXPECT_NEAR(h, static_cast<double>(series_binary_entropy_bits(p)), 1e-14) << p;
  }
}

TEST(BinaryEntropy, EndpointsAndSymmetry)
{
  EXPECT_DOUBLE_EQ(binary_entropy(0.5), 1.0);
  EXPECT_EQ(binary_entropy(0.0), 0.0);
  EXPECT_EQ(binary_entropy(1.0), 0.0);
  EXPECT_NEAR(binary_entropy(0.11), binary_entropy(0.89), 1e-15);
  EXPECT_NEAR(binary_entropy(0.11), static_cast<double>(series_binary_entropy_bits(0.11L)), 1e-14);
}

TEST(BinaryEntropyInverse, MatchesBisectionOracle)
{
  EXPECT_DOUBLE_EQ(binary_entropy_inv(1.0), 0.5);
  EXPECT_EQ(binary_entropy_inv(0.0), 0.0);
  for (double y : {0.5, 0.01, 0.25, 0.9, 0.999}) {
    const double r = binary_entropy_inv(y);
    EXPECT_LE(r, 0.5);
    EXPECT_NEAR(r, static_cast<double>(bisect_inverse(y)), 1e-13) << y;
  }
}

TEST(BinaryEntropyInverse, RejectsOutOfRange)
{
  EXPECT_THROW(binary_entropy_inv(-0.1), std::domain_error);
  EXPECT_THROW(binary_entropy_inv(1.1), std::domain_error);
}

TEST(Star, Arithmetic)
{
  EXPECT_DOUBLE_EQ(star(0.3, 0.0), 0.3);
  for (double a : {0.0, 0.2, 0.7, 1.0})
    EXPECT_DOUBLE_EQ(star(a, 0.5), 0.5);
  EXPECT_NEAR(star(0.1, 0.1), 0.18, 1e-15);
}

TEST(FDivergence, KnownValues)
{
  const Distribution p({0.3, 0.7});
  EXPECT_NEAR(f_divergence(DivergenceKernel::kl(), p, p), 0.0, 1e-15);
  for (double q : {0.1, 0.4}) {
    for (double x : {0.0, 0.25, 0.9}) {
      const Distribution a({x, 1.0 - x});
      const Distribution r({q, 1.0 - q});
      const double expected = (x - q) * (x - q) / (q * (1.0 - q));
      EXPECT_NEAR(f_divergence(DivergenceKernel::chi_squared(), a, r), expected, 1e-14);
    }
  }
  EXPECT_NEAR(f_divergence(DivergenceKernel::total_variation(), Distribution({1.0, 0.0}),
                           Distribution({0.5, 0.5})),
              0.5, 1e-15);
}

TEST(FDivergence, AbsoluteContinuity)
{
  EXPECT_THROW(f_divergence(DivergenceKernel::kl(), Distribution({0.5, 0.5}),
                            Distribution({1.0, 0.0})),
               AbsoluteContinuityError);
}

TEST(FInformation, ProductJointIsZero)
{
  const JointDistribution joint({{0.06, 0.14}, {0.24, 0.56}});
  for (const auto& k : {DivergenceKernel::kl(), DivergenceKernel::chi_squared(),
                        DivergenceKernel::total_variation()})
    EXPECT_NEAR(f_information(k, joint), 0.0, 1e-15);
}

TEST(FInformation, ChiSquaredIdentityCoupling)
{
  for (std::size_t m : {2u, 3u, 5u}) {
    std::vector<std::vector<double>> p(m, std::vector<double>(m, 0.0));
    double s = 0.0;
    for (std::size_t i = 0; i < m; ++i)
      s += p[i][i] = 1.0 + static_cast<double>(i);
    for (std::size_t i = 0; i < m; ++i)
      p[i][i] /= s;
    EXPECT_NEAR(f_information(DivergenceKernel::chi_squared(), JointDistribution(p)),
                static_cast<double>(m - 1), 1e-13);
  }
}

TEST(FInformation, KlMatchesDirectMutualInformation)
{
  const double q = 0.1, d = 0.1;
  const JointDistribution joint = JointDistribution::binary_symmetric(q, d);
  const auto px = joint.marginal_x();
  const auto py = joint.marginal_y();
  double mi = 0.0;
  for (std::size_t x = 0; x < 2; ++x)
    for (std::size_t y = 0; y < 2; ++y)
      mi += joint.at(x, y) * std::log(joint.at(x, y) / (px[x] * py[y]));
  EXPECT_NEAR(f_information(DivergenceKernel::kl(), joint), mi, 1e-15);
  EXPECT_NEAR(nats_to_bits(mi), binary_entropy(star(d, q)) - binary_entropy(d), 1e-14);
}

TEST(ConditionalFInformation, Cases)
{
  const Distribution q({0.7, 0.3});
  const std::vector<double> one{1.0};
  const std::vector<Distribution> trivial{q};
  EXPECT_NEAR(conditional_f_information(DivergenceKernel::kl(), one, trivial, q), 0.0, 1e-15);

  const std::vector<double> w{0.7, 0.3};
  const std::vector<Distribution> det{Distribution({1.0, 0.0}), Distribution({0.0, 1.0})};
  EXPECT_NEAR(conditional_f_information(DivergenceKernel::kl(), w, det, q), entropy(q), 1e-15);

  const Distribution half({0.5, 0.5});
  const std::vector<double> hw{0.5, 0.5};
  EXPECT_NEAR(conditional_f_information(DivergenceKernel::chi_squared(), hw, det, half), 1.0,
              1e-15);
}

TEST(ConditionalFInformation, RejectsInconsistentMixture)
{
  const std::vector<double> w{0.5, 0.5};
  const std::vector<Distribution> det{Distribution({1.0, 0.0}), Distribution({0.0, 1.0})};
  EXPECT_THROW(conditional_f_information(DivergenceKernel::kl(), w, det, Distribution({0.6, 0.4})),
               std::invalid_argument);
}

TEST(ArimotoK, Values)
{
  EXPECT_NEAR(arimoto_K(2.0, Distribution({0.5, 0.5})), 0.7071067811865476, 1e-15);
  for (double b : {2.0, 3.0, 7.5})
    EXPECT_DOUBLE_EQ(arimoto_K(b, Distribution({0.0, 1.0, 0.0})), 1.0);
  EXPECT_NEAR(arimoto_K(3.0, Distribution({0.2, 0.8})), std::cbrt(0.008 + 0.512), 1e-15);
}

TEST(ArimotoConditionalEntropy, Values)
{
  const Distribution q({0.3, 0.7});
  const std::vector<double> one{1.0};
  const std::vector<Distribution> single{q};
  EXPECT_NEAR(arimoto_conditional_entropy(2.0, one, single), renyi_entropy(2.0, q), 1e-15);
  EXPECT_NEAR(renyi_entropy(2.0, q), -2.0 * std::log(std::sqrt(0.09 + 0.49)), 1e-15);

  const std::vector<double> w{0.4, 0.6};
  const std::vector<Distribution> det{Distribution({1.0, 0.0}), Distribution({0.0, 1.0})};
  EXPECT_NEAR(arimoto_conditional_entropy(3.0, w, det), 0.0, 1e-15);

  const std::vector<double> hw{0.5, 0.5};
  const std::vector<Distribution> atoms{Distribution({0.3, 0.7}), Distribution({0.5, 0.5})};
  const double expected = -2.0 * std::log(0.5 * std::sqrt(0.58) + 0.5 / std::sqrt(2.0));
  EXPECT_NEAR(arimoto_conditional_entropy(2.0, hw, atoms), expected, 1e-14);
}

TEST(DecomposeJoint, BscRoundTrip)
{
  const Decomposition d = decompose_joint(JointDistribution::binary_symmetric(0.1, 0.1));
  EXPECT_NEAR(d.q[0], 0.9, 1e-15);
  EXPECT_NEAR(d.q[1], 0.1, 1e-15);
  EXPECT_NEAR(d.channel.at(1, 0), 0.1, 1e-15);
  EXPECT_NEAR(d.channel.at(0, 1), 0.1, 1e-15);
  EXPECT_NEAR(d.channel.at(0, 0), 0.9, 1e-15);
}

TEST(DecomposeJoint, ProductHasIdenticalColumns)
{
  const Decomposition d = decompose_joint(JointDistribution({{0.1, 0.3}, {0.15, 0.45}}));
  for (std::size_t y = 0; y < 2; ++y)
    EXPECT_NEAR(d.channel.at(y, 0), d.channel.at(y, 1), 1e-15);
}

TEST(DecomposeJoint, ZeroRowShrinksAlphabet)
{
  const JointDistribution joint({{0.2, 0.1}, {0.0, 0.0}, {0.3, 0.4}});
  const Decomposition d = decompose_joint(joint);
  ASSERT_EQ(d.q.size(), 2u);
  EXPECT_EQ(d.support, (std::vector<std::size_t>{0, 2}));
  const JointDistribution back = JointDistribution::from_marginal_channel(d.q, d.channel);
  EXPECT_NEAR(back.at(0, 0), 0.2, 1e-15);
  EXPECT_NEAR(back.at(1, 1), 0.4, 1e-15);
}

TEST(Distribution, Validation)
{
  EXPECT_THROW(Distribution({0.5, 0.6}), std::invalid_argument);
  EXPECT_THROW(Distribution({-0.1, 1.1}), std::invalid_argument);
  EXPECT_THROW(Channel::from_rows({{0.5, 0.5}, {0.4, 0.4}}), std::invalid_argument);
}

TEST(Nnls, RecoversNonnegativeSolution)
{
  // Columns e1, e2, (e1 + e2) / 2; b = (0.3, 0.7).
  const std::vector<double> a{1.0, 0.0, 0.5, 0.0, 1.0, 0.5};
  const std::vector<double> b{0.3, 0.7};
  const NnlsResult r = nnls(a, 2, 3, b);
  EXPECT_LT(r.residual, 1e-12);
  for (double v : r.x)
    EXPECT_GE(v, 0.0);

  const std::vector<double> neg{-1.0};
  const NnlsResult clipped = nnls(std::vector<double>{1.0}, 1, 1, neg);
  EXPECT_EQ(clipped.x[0], 0.0);
  EXPECT_NEAR(clipped.residual, 1.0, 1e-15);
}

TEST(Nnls, BarycentricWeights)
{
  const std::vector<Distribution> atoms{Distribution({0.9, 0.1}), Distribution({0.1, 0.9})};
  const auto w = barycentric_weights(atoms, Distribution({0.8, 0.2}));
  ASSERT_TRUE(w.has_value());
  EXPECT_NEAR((*w)[0], 0.875, 1e-12);
  EXPECT_NEAR((*w)[1], 0.125, 1e-12);
  EXPECT_FALSE(barycentric_weights(atoms, Distribution({0.95, 0.05})).has_value());
}

TEST(Witness, ValidatesMixture)
{
  using Atom = WitnessChannel::Atom;
  const Distribution q({0.9, 0.1});
  EXPECT_NO_THROW(WitnessChannel({Atom{0.5, Distribution({0.8, 0.2})},
                                  Atom{0.5, Distribution({1.0, 0.0})}},
                                 q));
  EXPECT_THROW(WitnessChannel({Atom{0.5, Distribution({0.8, 0.2})},
                               Atom{0.5, Distribution({0.9, 0.1})}},
                              q),
               std::invalid_argument);
  const WitnessChannel w = WitnessChannel::from_atoms(
      {Atom{0.25, Distribution({0.0, 1.0})}, Atom{0.0, Distribution({0.5, 0.5})},
       Atom{0.75, Distribution({1.0, 0.0})}});
  EXPECT_EQ(w.size(), 2u);
  EXPECT_EQ(w.to_json(), R"({"atoms":[{"alpha":0.25,"p":[0.0,1.0]},{"alpha":0.75,"p":[1.0,0.0]}]})");
}
