#pragma once

// Probability-simplex primitives: distributions, channels, joints, entropy and
// f-divergence evaluators.  Every type here is immutable after construction.

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace bottleneck {

/// Inputs whose total mass is within this distance of 1 are renormalized;
/// anything further away is rejected.
inline constexpr double kStochasticTolerance = 1e-9;

/// Tolerance on sum(alpha) == 1 and sum(alpha_w p_w) == q for mixtures.
inline constexpr double kMixtureTolerance = 1e-9;

/// A probability vector on an m-point alphabet, m >= 2.
class Distribution
{
public:
  explicit Distribution(std::vector<double> probs);

  /// [1 - p, p]: the second coordinate is P(X = 1).
  static Distribution bernoulli(double p);
  static Distribution vertex(std::size_t m, std::size_t i);
  static Distribution uniform(std::size_t m);

  std::size_t size() const noexcept { return probs_.size(); }
  double operator[](std::size_t i) const { return probs_[i]; }
  std::span<const double> probs() const noexcept { return probs_; }
  const std::vector<double>& values() const noexcept { return probs_; }

  /// Max-norm distance.
  double distance(const Distribution& other) const;

  friend bool operator==(const Distribution&, const Distribution&) = default;

private:
  std::vector<double> probs_;
};

/// Column-stochastic n x m matrix; column j is P(Y | X = j).
class Channel
{
public:
  explicit Channel(std::vector<Distribution> columns);

  /// Build from a row-major n x m matrix, [T]_{i,j} = P(Y = i | X = j).
  static Channel from_rows(const std::vector<std::vector<double>>& rows);
  static Channel binary_symmetric(double delta);

  std::size_t outputs() const noexcept { return outputs_; }
  std::size_t inputs() const noexcept { return columns_.size(); }
  double at(std::size_t i, std::size_t j) const { return columns_[j][i]; }
  const Distribution& column(std::size_t j) const { return columns_[j]; }

  /// T p for an arbitrary point of the input simplex.
  std::vector<double> apply(std::span<const double> p) const;
  Distribution apply(const Distribution& p) const;

private:
  std::vector<Distribution> columns_;
  std::size_t outputs_;
};

/// P(X = x, Y = y), rows indexed by x.
class JointDistribution
{
public:
  explicit JointDistribution(std::vector<std::vector<double>> p_xy);

  static JointDistribution from_marginal_channel(const Distribution& q, const Channel& t);
  /// Joint of X ~ Bernoulli(q) sent through BSC(delta).
  static JointDistribution binary_symmetric(double q, double delta);

  std::size_t rows() const noexcept { return p_xy_.size(); }
  std::size_t cols() const noexcept { return p_xy_.front().size(); }
  double at(std::size_t x, std::size_t y) const { return p_xy_[x][y]; }
  const std::vector<std::vector<double>>& matrix() const noexcept { return p_xy_; }

  std::vector<double> marginal_x() const;
  std::vector<double> marginal_y() const;

private:
  std::vector<std::vector<double>> p_xy_;
};

enum class KernelKind
{
  kl,
  chi_squared,
  total_variation,
  entropy,
  norm_beta,
};

/// The convex generator f of an f-divergence, or one of the direct simplex
/// functionals (Shannon entropy, l^beta norm) used in place of a divergence.
class DivergenceKernel
{
public:
  static DivergenceKernel kl() { return DivergenceKernel{KernelKind::kl, 0.0}; }
  static DivergenceKernel chi_squared() { return DivergenceKernel{KernelKind::chi_squared, 0.0}; }
  static DivergenceKernel total_variation() { return DivergenceKernel{KernelKind::total_variation, 0.0}; }
  static DivergenceKernel entropy() { return DivergenceKernel{KernelKind::entropy, 0.0}; }
  static DivergenceKernel norm_beta(double beta);

  KernelKind kind() const noexcept { return kind_; }
  double beta() const noexcept { return beta_; }
  bool is_divergence() const noexcept;

  /// f(t) for divergence kinds.  kl: t log t, chi_squared: t^2 - 1,
  /// total_variation: |t - 1| / 2.
  double generator(double t) const;

  std::string name() const;

  friend bool operator==(const DivergenceKernel&, const DivergenceKernel&) = default;

private:
  DivergenceKernel(KernelKind kind, double beta) : kind_(kind), beta_(beta) {}

  KernelKind kind_;
  double beta_;
};

/// Thrown when p_i > 0 while the reference has r_i = 0.
class AbsoluteContinuityError : public std::domain_error
{
public:
  explicit AbsoluteContinuityError(std::size_t index);
  std::size_t index() const noexcept { return index_; }

private:
  std::size_t index_;
};

/// Shannon entropy in nats, 0 log 0 = 0.
double entropy(std::span<const double> p);
double entropy(const Distribution& p);

/// h_b(q) in bits.
double binary_entropy(double q);

/// The unique r in [0, 1/2] with h_b(r) = y (bits).
double binary_entropy_inv(double y);

/// Binary convolution a * b = (1 - a) b + (1 - b) a.
double star(double a, double b);

inline constexpr double kLn2 = 0.69314718055994530942;
inline double nats_to_bits(double v) { return v / kLn2; }
inline double bits_to_nats(double v) { return v * kLn2; }

/// sum_i r_i f(p_i / r_i) with 0 f(0/0) = 0.
double f_divergence(const DivergenceKernel& kernel, std::span<const double> p,
                    std::span<const double> r);
double f_divergence(const DivergenceKernel& kernel, const Distribution& p, const Distribution& r);

/// D_f(P_XY || P_X P_Y).
double f_information(const DivergenceKernel& kernel, const JointDistribution& joint);

/// sum_w alpha_w D_f(p_w || q), after checking that the mixture reproduces q.
double conditional_f_information(const DivergenceKernel& kernel, std::span<const double> weights,
                                 std::span<const Distribution> conditionals,
                                 const Distribution& marginal);

/// ||p||_beta, beta >= 2.
double arimoto_K(double beta, std::span<const double> p);
double arimoto_K(double beta, const Distribution& p);

/// beta / (1 - beta) log sum_w alpha_w ||p_w||_beta.
double arimoto_conditional_entropy(double beta, std::span<const double> weights,
                                   std::span<const Distribution> conditionals);

/// Renyi entropy of order beta, beta / (1 - beta) log ||p||_beta.
double renyi_entropy(double beta, const Distribution& p);

struct Decomposition
{
  Distribution q;
  Channel channel;
  /// Original X indices kept after dropping zero-probability rows.
  std::vector<std::size_t> support;
};

/// Split a joint into its X-marginal and P(Y | X), restricted to supp(P_X).
Decomposition decompose_joint(const JointDistribution& joint);

/// Mixture check shared by the conditional evaluators.  Throws
/// std::invalid_argument when the weights or barycenter are off.
void check_mixture(std::span<const double> weights, std::span<const Distribution> conditionals,
                   const Distribution* marginal);

/// A functional on the input simplex obtained by resolving a kernel:
/// divergence kinds become p -> D_f(p || reference), entropy becomes h_m and
/// norm_beta becomes ||p||_beta.
class SimplexFunctional
{
public:
  static SimplexFunctional divergence_from(DivergenceKernel kernel, Distribution reference);
  static SimplexFunctional entropy();
  static SimplexFunctional norm(double beta);

  double operator()(std::span<const double> p) const;
  double operator()(const Distribution& p) const { return (*this)(p.probs()); }

  const DivergenceKernel& kernel() const noexcept { return kernel_; }
  /// True when the functional is built against a reference marginal.
  bool depends_on_reference() const noexcept { return !reference_.empty(); }
  std::span<const double> reference() const noexcept { return reference_; }

private:
  SimplexFunctional(DivergenceKernel kernel, std::vector<double> reference)
      : kernel_(kernel), reference_(std::move(reference))
  {
  }

  DivergenceKernel kernel_;
  std::vector<double> reference_;
};

}  // namespace bottleneck
