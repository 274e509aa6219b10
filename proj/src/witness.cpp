#include "bottleneck/witness.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace bottleneck {

namespace {

Distribution barycenter(const std::vector<WitnessChannel::Atom>& atoms)
{
  if (atoms.empty())
    throw std::invalid_argument("WitnessChannel: no atoms");
  std::vector<double> c(atoms.front().second.size(), 0.0);
  for (const auto& [w, p] : atoms) {
    if (p.size() != c.size())
      throw std::invalid_argument("WitnessChannel: atoms on different alphabets");
    for (std::size_t i = 0; i < c.size(); ++i)
      c[i] += w * p[i];
  }
  return Distribution(std::move(c));
}

}  // namespace

WitnessChannel::WitnessChannel(std::vector<Atom> atoms, Distribution marginal)
    : marginal_(std::move(marginal))
{
  double total = 0.0;
  for (auto& atom : atoms) {
    if (!(atom.first >= 0.0) || !std::isfinite(atom.first))
      throw std::invalid_argument("WitnessChannel: weights must be nonnegative");
    if (atom.first == 0.0)
      continue;
    if (atom.second.size() != marginal_.size())
      throw std::invalid_argument("WitnessChannel: atom alphabet differs from the marginal");
    total += atom.first;
    atoms_.push_back(std::move(atom));
  }
  if (atoms_.empty())
    throw std::invalid_argument("WitnessChannel: no atom with positive weight");
  if (std::abs(total - 1.0) > kMixtureTolerance)
    throw std::invalid_argument("WitnessChannel: weights do not sum to 1");
  std::vector<double> ws;
  std::vector<Distribution> ps;
  for (const auto& [w, p] : atoms_) {
    ws.push_back(w);
    ps.push_back(p);
  }
  check_mixture(ws, ps, &marginal_);
}

WitnessChannel WitnessChannel::from_atoms(std::vector<Atom> atoms)
{
  std::vector<Atom> kept;
  for (auto& a : atoms)
    if (a.first > 0.0)
      kept.push_back(std::move(a));
  Distribution c = barycenter(kept);
  return WitnessChannel(std::move(kept), std::move(c));
}

WitnessChannel WitnessChannel::trivial(const Distribution& q)
{
  return WitnessChannel({{1.0, q}}, q);
}

std::vector<double> WitnessChannel::weights() const
{
  std::vector<double> w;
  w.reserve(atoms_.size());
  for (const auto& a : atoms_)
    w.push_back(a.first);
  return w;
}

std::vector<Distribution> WitnessChannel::conditionals() const
{
  std::vector<Distribution> p;
  p.reserve(atoms_.size());
  for (const auto& a : atoms_)
    p.push_back(a.second);
  return p;
}

bool WitnessChannel::same_atoms(const WitnessChannel& other, double tol) const
{
  if (atoms_.size() != other.atoms_.size())
    return false;
  std::vector<char> used(atoms_.size(), 0);
  for (const auto& [w, p] : atoms_) {
    bool found = false;
    for (std::size_t k = 0; k < other.atoms_.size() && !found; ++k) {
      if (used[k])
        continue;
      const auto& o = other.atoms_[k].second;
      bool close = o.size() == p.size();
      for (std::size_t i = 0; close && i < p.size(); ++i)
        close = std::abs(o[i] - p[i]) <= tol;
      if (close) {
        used[k] = 1;
        found = true;
      }
    }
    if (!found)
      return false;
  }
  return true;
}

std::string WitnessChannel::to_json() const
{
  nlohmann::json atoms = nlohmann::json::array();
  for (const auto& [w, p] : atoms_)
    atoms.push_back({{"alpha", w}, {"p", p.values()}});
  return nlohmann::json{{"atoms", atoms}}.dump();
}

}  // namespace bottleneck
