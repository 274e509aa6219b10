#include "bottleneck/core_prob.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace bottleneck {

namespace {

std::vector<double> normalize_or_throw(std::vector<double> probs, const char* what)
{
  double total = 0.0;
  for (double& v : probs) {
    if (!std::isfinite(v))
      throw std::invalid_argument(std::string(what) + ": non-finite entry");
    if (v < -kStochasticTolerance)
      throw std::invalid_argument(std::string(what) + ": negative entry");
    if (v < 0.0)
      v = 0.0;
    total += v;
  }
  if (std::abs(total - 1.0) > kStochasticTolerance) {
    std::ostringstream msg;
    msg.precision(17);
    msg << what << ": entries sum to " << total << ", not 1";
    throw std::invalid_argument(msg.str());
  }
  for (double& v : probs)
    v /= total;
  return probs;
}

double xlogx(double v)
{
  return v > 0.0 ? v * std::log(v) : 0.0;
}

}  // namespace

// ---------------------------------------------------------------- Distribution

Distribution::Distribution(std::vector<double> probs)
{
  if (probs.size() < 2)
    throw std::invalid_argument("Distribution: alphabet size must be at least 2");
  probs_ = normalize_or_throw(std::move(probs), "Distribution");
}

Distribution Distribution::bernoulli(double p)
{
  if (!(p >= 0.0 && p <= 1.0))
    throw std::invalid_argument("Distribution::bernoulli: p outside [0, 1]");
  return Distribution({1.0 - p, p});
}

Distribution Distribution::vertex(std::size_t m, std::size_t i)
{
  if (i >= m)
    throw std::invalid_argument("Distribution::vertex: index out of range");
  std::vector<double> probs(m, 0.0);
  probs[i] = 1.0;
  return Distribution(std::move(probs));
}

Distribution Distribution::uniform(std::size_t m)
{
  return Distribution(std::vector<double>(m, 1.0 / static_cast<double>(m)));
}

double Distribution::distance(const Distribution& other) const
{
  if (other.size() != size())
    throw std::invalid_argument("Distribution::distance: alphabet mismatch");
  double d = 0.0;
  for (std::size_t i = 0; i < size(); ++i)
    d = std::max(d, std::abs(probs_[i] - other.probs_[i]));
  return d;
}

// --------------------------------------------------------------------- Channel

Channel::Channel(std::vector<Distribution> columns) : columns_(std::move(columns))
{
  if (columns_.empty())
    throw std::invalid_argument("Channel: no input symbols");
  outputs_ = columns_.front().size();
  for (const auto& c : columns_)
    if (c.size() != outputs_)
      throw std::invalid_argument("Channel: columns have different output alphabets");
}

Channel Channel::from_rows(const std::vector<std::vector<double>>& rows)
{
  if (rows.empty() || rows.front().empty())
    throw std::invalid_argument("Channel: empty matrix");
  const std::size_t n = rows.size();
  const std::size_t m = rows.front().size();
  std::vector<Distribution> columns;
  columns.reserve(m);
  for (std::size_t j = 0; j < m; ++j) {
    std::vector<double> col(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (rows[i].size() != m)
        throw std::invalid_argument("Channel: ragged matrix");
      col[i] = rows[i][j];
    }
    columns.emplace_back(std::move(col));
  }
  return Channel(std::move(columns));
}

Channel Channel::binary_symmetric(double delta)
{
  if (!(delta >= 0.0 && delta <= 1.0))
    throw std::invalid_argument("Channel::binary_symmetric: delta outside [0, 1]");
  return Channel({Distribution({1.0 - delta, delta}), Distribution({delta, 1.0 - delta})});
}

std::vector<double> Channel::apply(std::span<const double> p) const
{
  if (p.size() != inputs())
    throw std::invalid_argument("Channel::apply: input alphabet mismatch");
  std::vector<double> out(outputs_, 0.0);
  for (std::size_t j = 0; j < p.size(); ++j) {
    if (p[j] == 0.0)
      continue;
    const auto col = columns_[j].probs();
    for (std::size_t i = 0; i < outputs_; ++i)
      out[i] += col[i] * p[j];
  }
  return out;
}

Distribution Channel::apply(const Distribution& p) const
{
  return Distribution(apply(p.probs()));
}

// ----------------------------------------------------------- JointDistribution

JointDistribution::JointDistribution(std::vector<std::vector<double>> p_xy)
{
  if (p_xy.size() < 2 || p_xy.front().size() < 2)
    throw std::invalid_argument("JointDistribution: need at least a 2 x 2 table");
  const std::size_t n = p_xy.front().size();
  std::vector<double> flat;
  flat.reserve(p_xy.size() * n);
  for (const auto& row : p_xy) {
    if (row.size() != n)
      throw std::invalid_argument("JointDistribution: ragged table");
    flat.insert(flat.end(), row.begin(), row.end());
  }
  flat = normalize_or_throw(std::move(flat), "JointDistribution");
  for (std::size_t x = 0; x < p_xy.size(); ++x)
    for (std::size_t y = 0; y < n; ++y)
      p_xy[x][y] = flat[x * n + y];
  p_xy_ = std::move(p_xy);
}

JointDistribution JointDistribution::from_marginal_channel(const Distribution& q, const Channel& t)
{
  if (q.size() != t.inputs())
    throw std::invalid_argument("JointDistribution: marginal and channel disagree on |X|");
  std::vector<std::vector<double>> p(q.size(), std::vector<double>(t.outputs()));
  for (std::size_t x = 0; x < q.size(); ++x)
    for (std::size_t y = 0; y < t.outputs(); ++y)
      p[x][y] = q[x] * t.at(y, x);
  return JointDistribution(std::move(p));
}

JointDistribution JointDistribution::binary_symmetric(double q, double delta)
{
  return from_marginal_channel(Distribution::bernoulli(q), Channel::binary_symmetric(delta));
}

std::vector<double> JointDistribution::marginal_x() const
{
  std::vector<double> out(rows(), 0.0);
  for (std::size_t x = 0; x < rows(); ++x)
    out[x] = std::accumulate(p_xy_[x].begin(), p_xy_[x].end(), 0.0);
  return out;
}

std::vector<double> JointDistribution::marginal_y() const
{
  std::vector<double> out(cols(), 0.0);
  for (const auto& row : p_xy_)
    for (std::size_t y = 0; y < cols(); ++y)
      out[y] += row[y];
  return out;
}

// ------------------------------------------------------------ DivergenceKernel

DivergenceKernel DivergenceKernel::norm_beta(double beta)
{
  if (!(beta >= 2.0) || !std::isfinite(beta))
    throw std::invalid_argument("norm_beta kernel requires beta >= 2");
  return DivergenceKernel{KernelKind::norm_beta, beta};
}

bool DivergenceKernel::is_divergence() const noexcept
{
  return kind_ == KernelKind::kl || kind_ == KernelKind::chi_squared
         || kind_ == KernelKind::total_variation;
}

double DivergenceKernel::generator(double t) const
{
  switch (kind_) {
  case KernelKind::kl:
    return xlogx(t);
  case KernelKind::chi_squared:
    return t * t - 1.0;
  case KernelKind::total_variation:
    return 0.5 * std::abs(t - 1.0);
  default:
    throw std::invalid_argument("kernel " + name() + " has no divergence generator");
  }
}

std::string DivergenceKernel::name() const
{
  switch (kind_) {
  case KernelKind::kl:
    return "kl";
  case KernelKind::chi_squared:
    return "chi2";
  case KernelKind::total_variation:
    return "tv";
  case KernelKind::entropy:
    return "entropy";
  case KernelKind::norm_beta: {
    std::ostringstream s;
    s << "norm(" << beta_ << ")";
    return s.str();
  }
  }
  return "unknown";
}

AbsoluteContinuityError::AbsoluteContinuityError(std::size_t index)
    : std::domain_error("f_divergence: p is not absolutely continuous w.r.t. r at index "
                        + std::to_string(index)),
      index_(index)
{
}

// ------------------------------------------------------------------- entropies

double entropy(std::span<const double> p)
{
  double h = 0.0;
  for (double v : p)
    h -= xlogx(v);
  return std::max(h, 0.0);
}

double entropy(const Distribution& p)
{
  return entropy(p.probs());
}

double binary_entropy(double q)
{
  if (!(q >= 0.0 && q <= 1.0))
    throw std::domain_error("binary_entropy: argument outside [0, 1]");
  return nats_to_bits(-xlogx(q) - xlogx(1.0 - q));
}

double binary_entropy_inv(double y)
{
  if (!(y >= 0.0 && y <= 1.0))
    throw std::domain_error("binary_entropy_inv: argument outside [0, 1]");
  if (y == 0.0)
    return 0.0;
  if (y == 1.0)
    return 0.5;
  // Safeguarded Newton on [lo, hi]; h_b is increasing on [0, 1/2].
  double lo = 0.0;
  double hi = 0.5;
  double r = 0.25;
  for (int it = 0; it < 200; ++it) {
    const double fr = binary_entropy(r) - y;
    if (fr == 0.0)
      return r;
    if (fr < 0.0)
      lo = r;
    else
      hi = r;
    const double slope = std::log2((1.0 - r) / r);
    double next = r - fr / slope;
    if (!(next > lo && next < hi))
      next = 0.5 * (lo + hi);
    if (next == r || hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi)
      return next;
    r = next;
  }
  return r;
}

double star(double a, double b)
{
  if (!(a >= 0.0 && a <= 1.0) || !(b >= 0.0 && b <= 1.0))
    throw std::domain_error("star: arguments must lie in [0, 1]");
  return (1.0 - a) * b + (1.0 - b) * a;
}

// ---------------------------------------------------------------- divergences

double f_divergence(const DivergenceKernel& kernel, std::span<const double> p,
                    std::span<const double> r)
{
  if (!kernel.is_divergence())
    throw std::invalid_argument("f_divergence: kernel " + kernel.name() + " is not a divergence");
  if (p.size() != r.size())
    throw std::invalid_argument("f_divergence: alphabet mismatch");
  double d = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (r[i] == 0.0) {
      if (p[i] > 0.0)
        throw AbsoluteContinuityError(i);
      continue;
    }
    d += r[i] * kernel.generator(p[i] / r[i]);
  }
  return d;
}

double f_divergence(const DivergenceKernel& kernel, const Distribution& p, const Distribution& r)
{
  return f_divergence(kernel, p.probs(), r.probs());
}

double f_information(const DivergenceKernel& kernel, const JointDistribution& joint)
{
  const auto px = joint.marginal_x();
  const auto py = joint.marginal_y();
  std::vector<double> p;
  std::vector<double> r;
  p.reserve(px.size() * py.size());
  r.reserve(px.size() * py.size());
  for (std::size_t x = 0; x < px.size(); ++x)
    for (std::size_t y = 0; y < py.size(); ++y) {
      p.push_back(joint.at(x, y));
      r.push_back(px[x] * py[y]);
    }
  return f_divergence(kernel, p, r);
}

void check_mixture(std::span<const double> weights, std::span<const Distribution> conditionals,
                   const Distribution* marginal)
{
  if (weights.size() != conditionals.size() || weights.empty())
    throw std::invalid_argument("mixture: weights and conditionals differ in length");
  const std::size_t m = conditionals.front().size();
  double total = 0.0;
  std::vector<double> bary(m, 0.0);
  for (std::size_t w = 0; w < weights.size(); ++w) {
    if (!(weights[w] >= 0.0))
      throw std::invalid_argument("mixture: negative weight");
    if (conditionals[w].size() != m)
      throw std::invalid_argument("mixture: conditionals on different alphabets");
    total += weights[w];
    for (std::size_t i = 0; i < m; ++i)
      bary[i] += weights[w] * conditionals[w][i];
  }
  if (std::abs(total - 1.0) > kMixtureTolerance)
    throw std::invalid_argument("mixture: weights do not sum to 1");
  if (marginal != nullptr) {
    if (marginal->size() != m)
      throw std::invalid_argument("mixture: marginal on a different alphabet");
    for (std::size_t i = 0; i < m; ++i)
      if (std::abs(bary[i] - (*marginal)[i]) > kMixtureTolerance)
        throw std::invalid_argument("mixture: sum_w alpha_w p_w does not reproduce the marginal");
  }
}

double conditional_f_information(const DivergenceKernel& kernel, std::span<const double> weights,
                                 std::span<const Distribution> conditionals,
                                 const Distribution& marginal)
{
  check_mixture(weights, conditionals, &marginal);
  double total = 0.0;
  for (std::size_t w = 0; w < weights.size(); ++w)
    if (weights[w] > 0.0)
      total += weights[w] * f_divergence(kernel, conditionals[w], marginal);
  return total;
}

double arimoto_K(double beta, std::span<const double> p)
{
  if (!(beta >= 2.0))
    throw std::invalid_argument("arimoto_K: beta must be >= 2");
  // Scale by the max entry so p_i^beta cannot underflow for large beta.
  double top = 0.0;
  for (double v : p)
    top = std::max(top, v);
  if (top == 0.0)
    return 0.0;
  double s = 0.0;
  for (double v : p)
    s += std::pow(v / top, beta);
  return top * std::pow(s, 1.0 / beta);
}

double arimoto_K(double beta, const Distribution& p)
{
  return arimoto_K(beta, p.probs());
}

double arimoto_conditional_entropy(double beta, std::span<const double> weights,
                                   std::span<const Distribution> conditionals)
{
  check_mixture(weights, conditionals, nullptr);
  double k = 0.0;
  for (std::size_t w = 0; w < weights.size(); ++w)
    k += weights[w] * arimoto_K(beta, conditionals[w]);
  return beta / (1.0 - beta) * std::log(k);
}

double renyi_entropy(double beta, const Distribution& p)
{
  return beta / (1.0 - beta) * std::log(arimoto_K(beta, p));
}

Decomposition decompose_joint(const JointDistribution& joint)
{
  const auto px = joint.marginal_x();
  std::vector<std::size_t> support;
  for (std::size_t x = 0; x < px.size(); ++x)
    if (px[x] > 0.0)
      support.push_back(x);
  if (support.empty())
    throw std::invalid_argument("decompose_joint: all-zero joint");
  if (support.size() < 2)
    throw std::invalid_argument("decompose_joint: X is deterministic on its support");

  std::vector<double> q;
  std::vector<Distribution> columns;
  for (std::size_t x : support) {
    q.push_back(px[x]);
    std::vector<double> col(joint.cols());
    for (std::size_t y = 0; y < joint.cols(); ++y)
      col[y] = joint.at(x, y) / px[x];
    columns.emplace_back(std::move(col));
  }
  return Decomposition{Distribution(std::move(q)), Channel(std::move(columns)), std::move(support)};
}

// ---------------------------------------------------------- SimplexFunctional

SimplexFunctional SimplexFunctional::divergence_from(DivergenceKernel kernel,
                                                     Distribution reference)
{
  if (!kernel.is_divergence())
    throw std::invalid_argument("divergence_from: kernel " + kernel.name()
                                + " is not a divergence");
  return SimplexFunctional(kernel, reference.values());
}

SimplexFunctional SimplexFunctional::entropy()
{
  return SimplexFunctional(DivergenceKernel::entropy(), {});
}

SimplexFunctional SimplexFunctional::norm(double beta)
{
  return SimplexFunctional(DivergenceKernel::norm_beta(beta), {});
}

double SimplexFunctional::operator()(std::span<const double> p) const
{
  switch (kernel_.kind()) {
  case KernelKind::entropy:
    return bottleneck::entropy(p);
  case KernelKind::norm_beta:
    return arimoto_K(kernel_.beta(), p);
  default:
    return f_divergence(kernel_, p, reference_);
  }
}

}  // namespace bottleneck
