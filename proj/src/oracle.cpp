#include "bottleneck/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <stdexcept>

#include "bottleneck/nnls.hpp"
#include "bottleneck/parallel.hpp"

namespace bottleneck {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool feasible_x(double x, double target, Direction d, double tol)
{
  return d == Direction::lower ? x >= target - tol : x <= target + tol;
}

bool better_y(double y, double best, Direction d)
{
  return d == Direction::lower ? y < best : y > best;
}

// ------------------------------------------------------- binary exhaustive

/// A witness over grid atoms; index `resolution + 1` stands for q itself.
using AtomWeights = std::vector<std::pair<std::size_t, double>>;

struct Candidate
{
  double x = 0.0;
  double y = 0.0;
  AtomWeights atoms;
};

struct Family
{
  /// Indices into the candidate list, forming the hull for the direction.
  std::vector<std::size_t> hull;
};

AtomWeights mix(const AtomWeights& a, const AtomWeights& b, double theta_b)
{
  std::map<std::size_t, double> merged;
  for (const auto& [i, w] : a)
    merged[i] += (1.0 - theta_b) * w;
  for (const auto& [i, w] : b)
    merged[i] += theta_b * w;
  AtomWeights out;
  for (const auto& [i, w] : merged)
    if (w > 0.0)
      out.emplace_back(i, w);
  return out;
}

// Monotone chain over candidates sorted by (x, y); keeps the upper hull for
// Direction::upper and the lower hull otherwise.  Independent of the
// envelope module on purpose.
std::vector<std::size_t> chain(std::vector<std::size_t> ids, const std::vector<Candidate>& c,
                               Direction d)
{
  std::sort(ids.begin(), ids.end(), [&](std::size_t a, std::size_t b) {
    if (c[a].x != c[b].x)
      return c[a].x < c[b].x;
    return d == Direction::lower ? c[a].y < c[b].y : c[a].y > c[b].y;
  });
  std::vector<std::size_t> hull;
  const double sign = d == Direction::lower ? 1.0 : -1.0;
  for (std::size_t id : ids) {
    if (!hull.empty() && c[hull.back()].x == c[id].x)
      continue;
    while (hull.size() >= 2) {
      const Candidate& o = c[hull[hull.size() - 2]];
      const Candidate& a = c[hull.back()];
      const Candidate& b = c[id];
      const double cross = (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
      if (sign * cross <= 0.0)
        hull.pop_back();
      else
        break;
    }
    hull.push_back(id);
  }
  return hull;
}

struct Best
{
  double x = 0.0;
  double y = 0.0;
  AtomWeights atoms;
  bool found = false;
};

void offer(Best& best, double x, double y, const AtomWeights& atoms, Direction d)
{
  if (!best.found || better_y(y, best.y, d)) {
    best.x = x;
    best.y = y;
    best.atoms = atoms;
    best.found = true;
  }
}

std::uint64_t splitmix64(std::uint64_t x)
{
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

double unit(std::mt19937_64& eng)
{
  return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

// Uniform point of the simplex rounded to compositions / n.
Distribution random_grid_atom(std::mt19937_64& eng, std::size_t m, std::size_t n)
{
  std::vector<double> cuts(m + 1);
  cuts[0] = 0.0;
  cuts[m] = 1.0;
  for (std::size_t i = 1; i < m; ++i)
    cuts[i] = unit(eng);
  std::sort(cuts.begin(), cuts.end());
  std::vector<int> k(m);
  std::vector<std::pair<double, std::size_t>> rem(m);
  int used = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const double v = (cuts[i + 1] - cuts[i]) * static_cast<double>(n);
    k[i] = static_cast<int>(std::floor(v));
    used += k[i];
    rem[i] = {v - std::floor(v), i};
  }
  std::stable_sort(rem.begin(), rem.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (int r = 0; r < static_cast<int>(n) - used; ++r)
    ++k[rem[static_cast<std::size_t>(r) % m].second];
  std::vector<double> p(m);
  for (std::size_t i = 0; i < m; ++i)
    p[i] = static_cast<double>(k[i]) / static_cast<double>(n);
  return Distribution(std::move(p));
}

OracleResult finish(double x_target, Direction d, const Best& best, WitnessChannel witness,
                    std::size_t budget, std::size_t resolution, std::uint64_t seed, double tx,
                    double ty)
{
  OracleResult r{.x_target = x_target,
                 .direction = d,
                 .best_y = best.found ? best.y : ty,
                 .best_x = best.found ? best.x : tx,
                 .feasible = best.found,
                 .witness = std::move(witness),
                 .budget = budget,
                 .resolution = resolution,
                 .seed = seed};
  return r;
}

}  // namespace

std::vector<OracleResult> oracle_exhaustive(const SimplexFunctional& f,
                                            const SimplexFunctional& g, const Channel& t,
                                            const Distribution& q,
                                            std::span<const double> x_grid, Direction direction,
                                            std::size_t resolution, std::size_t budget,
                                            double tolerance)
{
  if (q.size() != 2 || t.inputs() != 2)
    throw std::invalid_argument("oracle_exhaustive: requires a binary input alphabet");
  if (budget < 1 || budget > 3)
    throw std::invalid_argument("oracle_exhaustive: atom budget must lie in [1, 3]");
  if (resolution < 1)
    throw std::invalid_argument("oracle_exhaustive: resolution must be positive");

  const std::size_t n = resolution;
  const std::size_t q_index = n + 1;
  const double q1 = q[1];
  auto atom = [&](std::size_t i) {
    return i == q_index ? q : Distribution::bernoulli(static_cast<double>(i) / static_cast<double>(n));
  };

  std::vector<double> fx(n + 1, kInf), gy(n + 1, kInf);
  std::vector<char> valid(n + 1, 0);
  for (std::size_t i = 0; i <= n; ++i) {
    try {
      const Distribution p = atom(i);
      fx[i] = f(p);
      gy[i] = g(t.apply(p));
      valid[i] = std::isfinite(fx[i]) && std::isfinite(gy[i]);
    } catch (const std::domain_error&) {
      valid[i] = 0;
    }
  }

  std::vector<Candidate> cands;
  cands.push_back({f(q), g(t.apply(q)), {{q_index, 1.0}}});
  std::vector<std::vector<std::size_t>> members(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    const double si = static_cast<double>(i) / static_cast<double>(n);
    if (!valid[i] || !(si < q1))
      continue;
    for (std::size_t j = i + 1; j <= n; ++j) {
      const double sj = static_cast<double>(j) / static_cast<double>(n);
      if (!valid[j] || !(sj > q1))
        continue;
      const double wj = (q1 - si) / (sj - si);
      const double wi = 1.0 - wj;
      members[i].push_back(cands.size());
      members[j].push_back(cands.size());
      cands.push_back({wi * fx[i] + wj * fx[j], wi * gy[i] + wj * gy[j], {{i, wi}, {j, wj}}});
    }
  }

  std::vector<Family> families;
  if (budget >= 3) {
    families.resize(n + 1);
    for (std::size_t s = 0; s <= n; ++s) {
      if (members[s].empty())
        continue;
      std::vector<std::size_t> ids = members[s];
      ids.push_back(0);
      families[s].hull = chain(std::move(ids), cands, direction);
    }
  }

  std::vector<std::optional<OracleResult>> out(x_grid.size());
  parallel_for(x_grid.size(), [&](std::size_t k) {
    const double target = x_grid[k];
    Best best;
    const std::size_t limit = budget >= 2 ? cands.size() : 1;
    for (std::size_t c = 0; c < limit; ++c)
      if (feasible_x(cands[c].x, target, direction, tolerance))
        offer(best, cands[c].x, cands[c].y, cands[c].atoms, direction);

    for (const Family& fam : families) {
      const auto& h = fam.hull;
      for (std::size_t v = 0; v + 1 < h.size(); ++v) {
        const Candidate& a = cands[h[v]];
        const Candidate& b = cands[h[v + 1]];
        if (!(a.x < target && target < b.x))
          continue;
        const double theta = (target - a.x) / (b.x - a.x);
        const double y = a.y + theta * (b.y - a.y);
        if (!best.found || better_y(y, best.y, direction))
          offer(best, target, y, mix(a.atoms, b.atoms, theta), direction);
      }
    }

    std::vector<WitnessChannel::Atom> atoms;
    if (best.found)
      for (const auto& [i, w] : best.atoms)
        atoms.emplace_back(w, atom(i));
    WitnessChannel witness =
        best.found ? WitnessChannel(std::move(atoms), q) : WitnessChannel::trivial(q);
    out[k] = finish(target, direction, best, std::move(witness), budget, resolution, 0,
                    cands[0].x, cands[0].y);
  });

  std::vector<OracleResult> results;
  results.reserve(out.size());
  for (auto& r : out)
    results.push_back(std::move(*r));
  return results;
}

std::vector<OracleResult> oracle_exhaustive_binary(const SimplexFunctional& f,
                                                   const SimplexFunctional& g, double delta,
                                                   double q, std::span<const double> x_grid,
                                                   Direction direction, std::size_t resolution,
                                                   std::size_t budget, double tolerance)
{
  return oracle_exhaustive(f, g, Channel::binary_symmetric(delta), Distribution::bernoulli(q),
                           x_grid, direction, resolution, budget, tolerance);
}

OracleResult oracle_boundary(const SimplexFunctional& f, const SimplexFunctional& g,
                             const Channel& t, const Distribution& q, double x_target,
                             Direction direction, const OracleConfig& cfg)
{
  const std::size_t m = q.size();
  if (cfg.atom_budget < 1 || cfg.atom_budget > m + 1)
    throw std::invalid_argument("oracle_boundary: atom budget must lie in [1, m + 1]");
  if (cfg.grid_resolution < 1)
    throw std::invalid_argument("oracle_boundary: grid resolution must be positive");
  if (t.inputs() != m)
    throw std::invalid_argument("oracle_boundary: channel inputs differ from the marginal size");

  if (m == 2) {
    const double grid[1] = {x_target};
    OracleResult r = oracle_exhaustive(f, g, t, q, grid, direction, cfg.grid_resolution,
                                       cfg.atom_budget, cfg.tolerance)
                         .front();
    r.seed = cfg.seed;
    return r;
  }

  auto evaluate = [&](const std::vector<WitnessChannel::Atom>& atoms, double& x,
                      double& y) -> bool {
    x = 0.0;
    y = 0.0;
    try {
      for (const auto& [w, p] : atoms) {
        x += w * f(p);
        y += w * g(t.apply(p));
      }
    } catch (const std::domain_error&) {
      return false;
    }
    return std::isfinite(x) && std::isfinite(y);
  };

  struct Slot
  {
    bool found = false;
    double x = 0.0;
    double y = 0.0;
    std::vector<WitnessChannel::Atom> atoms;
  };

  // Seed candidates: the trivial witness and, within budget, W = X.
  std::vector<Slot> fixed;
  {
    Slot s;
    s.atoms = {{1.0, q}};
    s.found = evaluate(s.atoms, s.x, s.y);
    fixed.push_back(s);
    std::vector<WitnessChannel::Atom> det;
    for (std::size_t i = 0; i < m; ++i)
      if (q[i] > 0.0)
        det.emplace_back(q[i], Distribution::vertex(m, i));
    if (det.size() <= cfg.atom_budget) {
      Slot d;
      d.atoms = det;
      d.found = evaluate(d.atoms, d.x, d.y);
      fixed.push_back(d);
    }
  }

  const int n = static_cast<int>(cfg.grid_resolution);
  auto to_dist = [&](const std::vector<int>& k) {
    std::vector<double> p(m);
    for (std::size_t i = 0; i < m; ++i)
      p[i] = static_cast<double>(k[i]) / static_cast<double>(n);
    return Distribution(std::move(p));
  };

  // Score of a witness on atoms `ks`: feasible witnesses rank by y, the
  // others by constraint violation after every feasible one.
  struct Score
  {
    bool valid = false;
    int tier = 2;
    double key = kInf;
    Slot slot;
  };
  auto score = [&](const std::vector<std::vector<int>>& ks) {
    Score s;
    std::vector<Distribution> atoms;
    for (const auto& k : ks)
      atoms.push_back(to_dist(k));
    const auto w = barycentric_weights(atoms, q);
    if (!w)
      return s;
    for (std::size_t i = 0; i < atoms.size(); ++i)
      if ((*w)[i] > 0.0)
        s.slot.atoms.emplace_back((*w)[i], atoms[i]);
    if (!evaluate(s.slot.atoms, s.slot.x, s.slot.y))
      return s;
    s.valid = true;
    if (feasible_x(s.slot.x, x_target, direction, cfg.tolerance)) {
      s.tier = 0;
      s.key = direction == Direction::lower ? s.slot.y : -s.slot.y;
      s.slot.found = true;
    } else {
      s.tier = 1;
      s.key = std::abs(s.slot.x - x_target);
    }
    return s;
  };
  auto improves = [](const Score& a, const Score& b) {
    return a.valid && (a.tier < b.tier || (a.tier == b.tier && a.key < b.key));
  };

  // Each restart runs every atom count 2..budget from its own stream, so a
  // larger budget only adds candidates.
  constexpr std::size_t kDraws = 64;
  constexpr std::size_t kSteps = 96;
  const std::size_t levels = cfg.atom_budget >= 2 ? cfg.atom_budget - 1 : 0;
  std::vector<Slot> slots(cfg.restarts * levels);
  parallel_for(slots.size(), [&](std::size_t job) {
    const std::size_t r = job / levels;
    const std::size_t k = 2 + job % levels;
    std::mt19937_64 eng(splitmix64(cfg.seed ^ splitmix64(r * 8 + k)));
    auto draw = [&] {
      Distribution d = random_grid_atom(eng, m, cfg.grid_resolution);
      std::vector<int> c(m);
      for (std::size_t i = 0; i < m; ++i)
        c[i] = static_cast<int>(std::lround(d[i] * n));
      // Bias toward faces, where boundary witnesses live.
      if (eng() % 2 == 0) {
        const std::size_t zero = eng() % m;
        const std::size_t to = (zero + 1 + eng() % (m - 1)) % m;
        c[to] += c[zero];
        c[zero] = 0;
      }
      return c;
    };

    Score cur;
    std::vector<std::vector<int>> ks;
    for (std::size_t d = 0; d < kDraws && !cur.valid; ++d) {
      ks.clear();
      for (std::size_t i = 0; i < k; ++i)
        ks.push_back(draw());
      cur = score(ks);
    }
    if (!cur.valid)
      return;
    int max_shift = 0;
    while ((n >> (max_shift + 1)) >= 1)
      ++max_shift;
    for (std::size_t step = 0; step < kSteps; ++step) {
      auto next = ks;
      auto& atom = next[eng() % k];
      const std::size_t a = eng() % m;
      const std::size_t b = (a + 1 + eng() % (m - 1)) % m;
      const int amount = std::min(atom[a], 1 << (eng() % static_cast<std::uint64_t>(max_shift + 1)));
      if (amount <= 0)
        continue;
      atom[a] -= amount;
      atom[b] += amount;
      Score s = score(next);
      if (improves(s, cur)) {
        cur = std::move(s);
        ks = std::move(next);
      }
    }
    if (cur.tier == 0)
      slots[job] = std::move(cur.slot);
  });

  Best best;
  const Slot* chosen = nullptr;
  auto consider = [&](const Slot& s) {
    if (!s.found || !feasible_x(s.x, x_target, direction, cfg.tolerance))
      return;
    if (!best.found || better_y(s.y, best.y, direction)) {
      best.found = true;
      best.x = s.x;
      best.y = s.y;
      chosen = &s;
    }
  };
  for (const Slot& s : fixed)
    consider(s);
  for (const Slot& s : slots)
    consider(s);

  WitnessChannel witness =
      chosen != nullptr ? WitnessChannel(chosen->atoms, q) : WitnessChannel::trivial(q);
  return finish(x_target, direction, best, std::move(witness), cfg.atom_budget,
                cfg.grid_resolution, cfg.seed, fixed[0].x, fixed[0].y);
}

}  // namespace bottleneck
