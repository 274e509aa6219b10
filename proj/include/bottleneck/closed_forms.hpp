#pragma once

// Binary-symmetric closed forms.  Entropy-frame values are in bits; Arimoto
// values are in the K-frame (l^beta norms) unless mapped explicitly.

#include <utility>

#include "bottleneck/core_prob.hpp"
#include "bottleneck/witness.hpp"

namespace bottleneck {

/// X ~ Bernoulli(q) (q = P(X = 1)) through a BSC with crossover delta.
struct BscInstance
{
  BscInstance(double q, double delta);

  double q;
  double delta;

  Distribution marginal() const { return Distribution::bernoulli(q); }
  Channel channel() const { return Channel::binary_symmetric(delta); }
};

struct GerberPoint
{
  double x = 0.0;
  double y = 0.0;
  double alpha = 0.0;
  WitnessChannel witness;
};

/// Lower boundary h_b(delta * h_b^{-1}(x)) for x in [0, h_b(q)].
double mgl(const BscInstance& inst, double x);

/// Upper boundary point at mixture parameter alpha with its optimal witness.
GerberPoint mr_gerber_param(const BscInstance& inst, double alpha);

/// {[1,0] w.p. 1 - alpha, [1 - q/alpha, q/alpha] w.p. alpha}; alpha > 0.
WitnessChannel mr_gerber_two_atom_witness(const BscInstance& inst, double alpha);
/// {[1,0], [0,1], [1/2,1/2]} with weights {1 - q - alpha/2, q - alpha/2,
/// alpha}; rejects alpha > 2q.
WitnessChannel mr_gerber_three_atom_witness(const BscInstance& inst, double alpha);

/// Upper boundary at x in [0, h_b(q)], inverting the alpha parametrization by
/// bisection.
double mr_gerber(const BscInstance& inst, double x);
/// The alpha with x(alpha) = x.
double mr_gerber_alpha(const BscInstance& inst, double x);

/// (K_beta(p), K_beta(p * delta)) for p in [0, q].
std::pair<double, double> arimoto_mgl(const BscInstance& inst, double beta, double p);
/// (1 - alpha + alpha K_beta(q/z), alpha K_beta(q/z * delta) + (1 - alpha) K_beta(delta)),
/// z = max(alpha, 2q).
std::pair<double, double> arimoto_mr_gerber(const BscInstance& inst, double beta, double alpha);

/// K-frame lower and upper boundaries as functions of x in [K_beta(q), 1].
double arimoto_mgl_at(const BscInstance& inst, double beta, double x);
double arimoto_mr_gerber_at(const BscInstance& inst, double beta, double x);

/// beta / (1 - beta) log(v) for v in (0, 1].
double arimoto_entropy_frame(double v, double beta);
/// Inverse of arimoto_entropy_frame.
double arimoto_k_frame(double h, double beta);

}  // namespace bottleneck
