#pragma once

// A finite mixture {(alpha_i, p_i)} realizing P_W and P_{X|W}.

#include <string>
#include <utility>
#include <vector>

#include "bottleneck/core_prob.hpp"

namespace bottleneck {

class WitnessChannel
{
public:
  using Atom = std::pair<double, Distribution>;

  /// Drops zero-weight atoms, then requires positive weights summing to one
  /// and a barycenter within kMixtureTolerance of `marginal`.
  WitnessChannel(std::vector<Atom> atoms, Distribution marginal);

  /// Marginal taken as the barycenter of the atoms.
  static WitnessChannel from_atoms(std::vector<Atom> atoms);
  static WitnessChannel trivial(const Distribution& q);

  const std::vector<Atom>& atoms() const noexcept { return atoms_; }
  const Distribution& marginal() const noexcept { return marginal_; }
  std::size_t size() const noexcept { return atoms_.size(); }

  std::vector<double> weights() const;
  std::vector<Distribution> conditionals() const;

  /// sum_i alpha_i F(p_i).
  template <typename F>
  double expectation(F&& fn) const
  {
    double s = 0.0;
    for (const auto& [w, p] : atoms_)
      s += w * fn(p);
    return s;
  }

  /// Same atoms up to `tol` in every coordinate, in any order.
  bool same_atoms(const WitnessChannel& other, double tol = 1e-12) const;

  /// {"atoms":[{"alpha":a,"p":[...]}, ...]}
  std::string to_json() const;

private:
  std::vector<Atom> atoms_;
  Distribution marginal_;
};

}  // namespace bottleneck
