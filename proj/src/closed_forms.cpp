#include "bottleneck/closed_forms.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bottleneck {

namespace {

constexpr double kDomainSlack = 1e-12;

void require_beta(double beta)
{
  if (!(beta >= 2.0))
    throw std::invalid_argument("Arimoto closed forms require beta >= 2");
}

double clamp_domain(double x, double lo, double hi, const char* what)
{
  if (!(x >= lo - kDomainSlack && x <= hi + kDomainSlack))
    throw std::domain_error(std::string(what) + ": x outside the boundary domain");
  return std::clamp(x, lo, hi);
}

double k_bernoulli(double beta, double p)
{
  const double v[2] = {1.0 - p, p};
  return arimoto_K(beta, v);
}

// Root of a monotone function on [lo, hi] by bisection; `increasing`
// gives its direction.
template <typename F>
double bisect(F&& fn, double target, double lo, double hi, bool increasing)
{
  for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
    const double mid = 0.5 * (lo + hi);
    const bool below = fn(mid) < target;
    if (below == increasing)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

BscInstance::BscInstance(double q_, double delta_) : q(q_), delta(delta_)
{
  if (!(q >= 0.0 && q <= 0.5))
    throw std::invalid_argument("BscInstance: q must lie in [0, 1/2]");
  if (!(delta >= 0.0 && delta <= 0.5))
    throw std::invalid_argument("BscInstance: delta must lie in [0, 1/2]");
}

double mgl(const BscInstance& inst, double x)
{
  x = clamp_domain(x, 0.0, binary_entropy(inst.q), "mgl");
  return binary_entropy(star(inst.delta, binary_entropy_inv(x)));
}

WitnessChannel mr_gerber_two_atom_witness(const BscInstance& inst, double alpha)
{
  if (!(alpha > 0.0 && alpha <= 1.0) || inst.q > alpha)
    throw std::domain_error("mr_gerber_two_atom_witness: requires q <= alpha <= 1");
  return WitnessChannel({{1.0 - alpha, Distribution::bernoulli(0.0)},
                         {alpha, Distribution::bernoulli(inst.q / alpha)}},
                        inst.marginal());
}

WitnessChannel mr_gerber_three_atom_witness(const BscInstance& inst, double alpha)
{
  if (!(alpha >= 0.0) || alpha > 2.0 * inst.q + 1e-15)
    throw std::domain_error("mr_gerber_three_atom_witness: requires 0 <= alpha <= 2q");
  const double half = 0.5 * alpha;
  return WitnessChannel({{std::max(0.0, 1.0 - inst.q - half), Distribution::bernoulli(0.0)},
                         {std::max(0.0, inst.q - half), Distribution::bernoulli(1.0)},
                         {alpha, Distribution::bernoulli(0.5)}},
                        inst.marginal());
}

GerberPoint mr_gerber_param(const BscInstance& inst, double alpha)
{
  if (!(alpha >= 0.0 && alpha <= 1.0))
    throw std::domain_error("mr_gerber_param: alpha must lie in [0, 1]");
  const double hd = binary_entropy(inst.delta);
  if (inst.q == 0.0)
    return {0.0, hd, alpha, WitnessChannel::trivial(inst.marginal())};
  const double z = std::max(alpha, 2.0 * inst.q);
  const double s = inst.q / z;
  GerberPoint out{.x = alpha * binary_entropy(s),
                  .y = alpha * binary_entropy(star(inst.delta, s)) + (1.0 - alpha) * hd,
                  .alpha = alpha,
                  .witness = alpha >= 2.0 * inst.q ? mr_gerber_two_atom_witness(inst, alpha)
                                                   : mr_gerber_three_atom_witness(inst, alpha)};
  return out;
}

double mr_gerber_alpha(const BscInstance& inst, double x)
{
  const double top = binary_entropy(inst.q);
  x = clamp_domain(x, 0.0, top, "mr_gerber");
  if (x <= 0.0)
    return 0.0;
  if (x >= top)
    return 1.0;
  return bisect([&](double a) { return mr_gerber_param(inst, a).x; }, x, 0.0, 1.0, true);
}

double mr_gerber(const BscInstance& inst, double x)
{
  if (inst.q == 0.0) {
    clamp_domain(x, 0.0, 0.0, "mr_gerber");
    return binary_entropy(inst.delta);
  }
  return mr_gerber_param(inst, mr_gerber_alpha(inst, x)).y;
}

std::pair<double, double> arimoto_mgl(const BscInstance& inst, double beta, double p)
{
  require_beta(beta);
  if (!(p >= 0.0 && p <= inst.q))
    throw std::domain_error("arimoto_mgl: p must lie in [0, q]");
  return {k_bernoulli(beta, p), k_bernoulli(beta, star(p, inst.delta))};
}

std::pair<double, double> arimoto_mr_gerber(const BscInstance& inst, double beta, double alpha)
{
  require_beta(beta);
  if (!(alpha >= 0.0 && alpha <= 1.0))
    throw std::domain_error("arimoto_mr_gerber: alpha must lie in [0, 1]");
  const double z = std::max(alpha, 2.0 * inst.q);
  const double s = z > 0.0 ? inst.q / z : 0.0;
  const double kd = k_bernoulli(beta, inst.delta);
  return {1.0 - alpha + alpha * k_bernoulli(beta, s),
          alpha * k_bernoulli(beta, star(s, inst.delta)) + (1.0 - alpha) * kd};
}

double arimoto_mgl_at(const BscInstance& inst, double beta, double x)
{
  require_beta(beta);
  const double lo = k_bernoulli(beta, inst.q);
  x = clamp_domain(x, lo, 1.0, "arimoto_mgl_at");
  // K_beta(p) decreases on [0, 1/2].
  const double p = bisect([&](double v) { return k_bernoulli(beta, v); }, x, 0.0, inst.q, false);
  return arimoto_mgl(inst, beta, p).second;
}

double arimoto_mr_gerber_at(const BscInstance& inst, double beta, double x)
{
  require_beta(beta);
  const double lo = k_bernoulli(beta, inst.q);
  x = clamp_domain(x, lo, 1.0, "arimoto_mr_gerber_at");
  const double alpha = bisect([&](double a) { return arimoto_mr_gerber(inst, beta, a).first; }, x,
                              0.0, 1.0, false);
  return arimoto_mr_gerber(inst, beta, alpha).second;
}

double arimoto_entropy_frame(double v, double beta)
{
  require_beta(beta);
  if (!(v > 0.0 && v <= 1.0 + kDomainSlack))
    throw std::domain_error("arimoto_entropy_frame: input must lie in (0, 1]");
  return beta / (1.0 - beta) * std::log(std::min(v, 1.0));
}

double arimoto_k_frame(double h, double beta)
{
  require_beta(beta);
  return std::exp((1.0 - beta) / beta * h);
}

}  // namespace bottleneck
