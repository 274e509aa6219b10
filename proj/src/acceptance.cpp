#include "bottleneck/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <random>
#include <stdexcept>

#include "bottleneck/closed_forms.hpp"
#include "bottleneck/dual_sweep.hpp"
#include "bottleneck/oracle.hpp"

namespace bottleneck {

namespace {

std::string fmt(const char* pattern, ...)
{
  char buf[512];
  va_list args;
  va_start(args, pattern);
  std::vsnprintf(buf, sizeof(buf), pattern, args);
  va_end(args);
  return buf;
}

double bits(double nats) { return nats_to_bits(nats); }

class Stopwatch
{
public:
  double seconds() const
  {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

constexpr double kBoundaryTol = 2e-3;
constexpr double kOracleTol = 5e-3;
constexpr double kMatchedTol = 5e-3;
constexpr std::size_t kSteps = 256;
constexpr std::size_t kBinaryResolution = 4096;

BscInstance reference_instance() { return BscInstance(0.1, 0.1); }

BoundarySolver entropy_solver(const BscInstance& inst)
{
  return BoundarySolver(SimplexFunctional::entropy(), SimplexFunctional::entropy(),
                        inst.channel(), inst.marginal(), kBinaryResolution);
}

std::vector<double> entropy_grid(const BoundarySolver& s, double delta)
{
  const double landmark[1] = {(1.0 - 2.0 * delta) * (1.0 - 2.0 * delta)};
  return s.default_lambda_grid(kSteps, landmark);
}

CriterionResult start(const char* id, const char* title)
{
  CriterionResult r;
  r.id = id;
  r.title = title;
  return r;
}

}  // namespace

// ---------------------------------------------------------------------- A1

CriterionResult check_mgl_exactness()
{
  Stopwatch clock;
  CriterionResult r = start("A1", "MGL exactness");
  const BscInstance inst = reference_instance();
  const BoundarySolver solver = entropy_solver(inst);
  const BoundaryCurve lower = solver.sweep(Direction::lower, entropy_grid(solver, inst.delta));
  const double hq = binary_entropy(inst.q);
  double worst = 0.0;
  double worst_x = 0.0;
  for (int k = 0; k <= 100; ++k) {
    const double x = hq * k / 100.0;
    const double v = bits(funnel_value(lower, bits_to_nats(x)).value);
    const double d = std::abs(v - mgl(inst, x));
    if (d > worst) {
      worst = d;
      worst_x = x;
    }
  }
  r.seconds = clock.seconds();
  r.passed = worst <= kBoundaryTol;
  r.summary = fmt("max |dy| = %.3e bits at x = %.4f over 101 x-points (tol %.0e); %zu curve points; "
                  "%.2f s",
                  worst, worst_x, kBoundaryTol, lower.points.size(), r.seconds);
  return r;
}

// ---------------------------------------------------------------------- A2

CriterionResult check_mr_gerber_exactness()
{
  Stopwatch clock;
  CriterionResult r = start("A2", "Mr. Gerber exactness");
  const BscInstance inst = reference_instance();
  const BoundarySolver solver = entropy_solver(inst);
  const BoundaryCurve upper = solver.sweep(Direction::upper, entropy_grid(solver, inst.delta));
  double worst = 0.0;
  double worst_alpha = 0.0;
  for (int k = 0; k <= 100; ++k) {
    const double alpha = k / 100.0;
    const GerberPoint g = mr_gerber_param(inst, alpha);
    const double v = bits(bottleneck_value(upper, bits_to_nats(g.x)).value);
    const double d = std::abs(v - g.y);
    if (d > worst) {
      worst = d;
      worst_alpha = alpha;
    }
  }
  r.seconds = clock.seconds();
  r.passed = worst <= kBoundaryTol;
  r.summary = fmt("max |dy| = %.3e bits at alpha = %.2f over 101 alphas (tol %.0e); %zu curve "
                  "points; %.2f s",
                  worst, worst_alpha, kBoundaryTol, upper.points.size(), r.seconds);
  return r;
}

// ---------------------------------------------------------------------- A3

CriterionResult check_arimoto()
{
  Stopwatch clock;
  CriterionResult r = start("A3", "Arimoto beta = 2");
  const BscInstance inst(0.4, 0.2);
  const double beta = 2.0;
  const BoundarySolver solver(SimplexFunctional::norm(beta), SimplexFunctional::norm(beta),
                              inst.channel(), inst.marginal(), kBinaryResolution);
  const auto grid = solver.default_lambda_grid(kSteps);
  const BoundaryCurve lower = solver.sweep(Direction::lower, grid);
  const BoundaryCurve upper = solver.sweep(Direction::upper, grid);
  double worst_lo = 0.0;
  double worst_up = 0.0;
  for (int k = 0; k <= 100; ++k) {
    const auto [xl, yl] = arimoto_mgl(inst, beta, inst.q * k / 100.0);
    worst_lo = std::max(worst_lo, std::abs(funnel_value(lower, xl).value - yl));
    const auto [xu, yu] = arimoto_mr_gerber(inst, beta, k / 100.0);
    worst_up = std::max(worst_up, std::abs(bottleneck_value(upper, xu).value - yu));
  }
  r.seconds = clock.seconds();
  r.passed = worst_lo <= kBoundaryTol && worst_up <= kBoundaryTol;
  r.summary = fmt("K-frame max |dy|: lower vs Arimoto MGL %.3e, upper vs Arimoto Mr. Gerber %.3e "
                  "(tol %.0e); %.2f s",
                  worst_lo, worst_up, kBoundaryTol, r.seconds);
  return r;
}

// ---------------------------------------------------------------------- A4

CriterionResult check_oracle_cross(std::uint64_t seed)
{
  Stopwatch clock;
  CriterionResult r = start("A4", "oracle cross-validation");
  const BscInstance inst = reference_instance();
  constexpr std::size_t kResolution = 512;
  constexpr int kPoints = 21;
  bool ok = true;

  // Entropy kernels: one-sided against the sweeps, two-sided against the
  // closed forms.
  {
    const BoundarySolver solver = entropy_solver(inst);
    const auto grid = entropy_grid(solver, inst.delta);
    const BoundaryCurve lower = solver.sweep(Direction::lower, grid);
    const BoundaryCurve upper = solver.sweep(Direction::upper, grid);
    std::vector<double> xs;
    const double hq = entropy(inst.marginal());
    for (int k = 0; k < kPoints; ++k)
      xs.push_back(hq * k / (kPoints - 1));
    const auto h = SimplexFunctional::entropy();
    const auto olo =
        oracle_exhaustive_binary(h, h, inst.delta, inst.q, xs, Direction::lower, kResolution);
    const auto oup =
        oracle_exhaustive_binary(h, h, inst.delta, inst.q, xs, Direction::upper, kResolution);
    double side_lo = 0.0, side_up = 0.0, cf_lo = 0.0, cf_up = 0.0;
    bool feasible = true;
    for (int k = 0; k < kPoints; ++k) {
      const double xb = bits(xs[k]);
      feasible = feasible && olo[k].feasible && oup[k].feasible;
      side_lo = std::max(side_lo, bits(funnel_value(lower, xs[k]).value - olo[k].best_y));
      side_up = std::max(side_up, bits(oup[k].best_y - bottleneck_value(upper, xs[k]).value));
      cf_lo = std::max(cf_lo, std::abs(bits(olo[k].best_y) - mgl(inst, xb)));
      cf_up = std::max(cf_up, std::abs(bits(oup[k].best_y) - mr_gerber(inst, xb)));
    }
    const bool pass = feasible && side_lo <= kOracleTol && side_up <= kOracleTol
                      && cf_lo <= kOracleTol && cf_up <= kOracleTol;
    ok = ok && pass;
    r.details.push_back(fmt("entropy: sweep_lower - oracle_lower <= %.3e, oracle_upper - "
                            "sweep_upper <= %.3e, |oracle - MGL| <= %.3e, |oracle - Mr.GL| <= "
                            "%.3e bits%s",
                            std::max(side_lo, 0.0), std::max(side_up, 0.0), cf_lo, cf_up,
                            feasible ? "" : " (infeasible oracle query)"));
  }

  // Chi-squared kernels: one-sided against the sweeps.
  {
    const Distribution q = inst.marginal();
    const Channel t = inst.channel();
    const auto f = SimplexFunctional::divergence_from(DivergenceKernel::chi_squared(), q);
    const auto g = SimplexFunctional::divergence_from(DivergenceKernel::chi_squared(), t.apply(q));
    const BoundarySolver solver(f, g, t, q, kBinaryResolution);
    const auto grid = solver.default_lambda_grid(kSteps);
    const BoundaryCurve lower = solver.sweep(Direction::lower, grid);
    const BoundaryCurve upper = solver.sweep(Direction::upper, grid);
    std::vector<double> xs;
    const double top = lower.points.back().x;
    for (int k = 0; k < kPoints; ++k)
      xs.push_back(top * k / (kPoints - 1));
    const auto olo = oracle_exhaustive(f, g, t, q, xs, Direction::lower, kResolution);
    const auto oup = oracle_exhaustive(f, g, t, q, xs, Direction::upper, kResolution);
    double side_lo = 0.0, side_up = 0.0;
    bool feasible = true;
    for (int k = 0; k < kPoints; ++k) {
      feasible = feasible && olo[k].feasible && oup[k].feasible;
      side_lo = std::max(side_lo, funnel_value(lower, xs[k]).value - olo[k].best_y);
      side_up = std::max(side_up, oup[k].best_y - bottleneck_value(upper, xs[k]).value);
    }
    const bool pass = feasible && side_lo <= kOracleTol && side_up <= kOracleTol;
    ok = ok && pass;
    r.details.push_back(fmt("chi-squared: sweep_lower - oracle_lower <= %.3e, oracle_upper - "
                            "sweep_upper <= %.3e%s",
                            std::max(side_lo, 0.0), std::max(side_up, 0.0),
                            feasible ? "" : " (infeasible oracle query)"));
  }
  (void)seed;  // the binary oracle is exhaustive, hence seed-free
  r.seconds = clock.seconds();
  r.passed = ok && r.seconds < 60.0;
  r.summary = fmt("resolution %zu, budget 3, %d x-points per curve (tol %.0e); %.2f s (limit 60 s)",
                  kResolution, kPoints, kOracleTol, r.seconds);
  return r;
}

// ---------------------------------------------------------------------- A5

CriterionResult check_matched_channels()
{
  Stopwatch clock;
  CriterionResult r = start("A5", "matched-channel invariance");
  const BscInstance inst = reference_instance();
  const BoundarySolver solver = entropy_solver(inst);
  const auto grid = entropy_grid(solver, inst.delta);
  const BoundaryCurve lower = solver.sweep(Direction::lower, grid);

  constexpr double kShift = 0.01;
  std::vector<const BoundaryPoint*> pool;
  for (const auto& p : lower.points) {
    if (p.trivial || p.witness.size() != 2 || !std::isfinite(p.lambda))
      continue;
    const double a = p.witness.atoms()[0].second[1];
    const double b = p.witness.atoms()[1].second[1];
    if (std::min(a, b) <= inst.q - 1.5 * kShift && std::max(a, b) >= inst.q + 1.5 * kShift)
      pool.push_back(&p);
  }
  constexpr std::size_t kWanted = 10;
  if (pool.size() < kWanted) {
    r.seconds = clock.seconds();
    r.summary = fmt("only %zu eligible non-trivial points (need %zu)", pool.size(), kWanted);
    return r;
  }
  std::vector<const BoundaryPoint*> chosen;
  for (std::size_t k = 0; k < kWanted; ++k)
    chosen.push_back(pool[k * (pool.size() - 1) / (kWanted - 1)]);

  double worst = 0.0;
  double worst_gap = 0.0;
  bool atoms_same = true;
  bool on_boundary = true;
  for (const double sign : {-1.0, 1.0}) {
    const BscInstance moved(inst.q + sign * kShift, inst.delta);
    const BoundarySolver fresh = entropy_solver(moved);
    const BoundaryCurve fresh_lower =
        fresh.sweep(Direction::lower, entropy_grid(fresh, moved.delta));
    for (const BoundaryPoint* p : chosen) {
      const InvarianceCheck inv =
          matched_channel_invariance_check(solver, *p, moved.marginal(), Direction::lower);
      const BoundaryPoint again = fresh.point_at_lambda(p->lambda, Direction::lower);
      atoms_same = atoms_same && inv.point.witness.same_atoms(again.witness);
      on_boundary = on_boundary && inv.on_boundary;
      worst_gap = std::max(worst_gap, std::abs(inv.supporting_gap));
      const double d1 = bits(std::abs(inv.point.y - again.y));
      const double d2 = bits(std::abs(inv.point.y - funnel_value(fresh_lower, inv.point.x).value));
      worst = std::max({worst, d1, d2});
      r.details.push_back(fmt("lambda %.5f q' %.2f: atoms {%.6f, %.6f} x %.5f y %.5f bits; fresh "
                              "|dy| %.2e / %.2e",
                              p->lambda, moved.q, p->witness.atoms()[0].second[1],
                              p->witness.atoms()[1].second[1], bits(inv.point.x),
                              bits(inv.point.y), d1, d2));
    }
  }
  r.seconds = clock.seconds();
  r.passed = worst <= kMatchedTol && atoms_same && on_boundary;
  r.summary = fmt("10 points x q +/- 0.01: max |dy| vs fresh sweep %.3e bits (tol %.0e); atom sets "
                  "%s; max supporting-line gap %.1e; %.2f s",
                  worst, kMatchedTol, atoms_same ? "identical" : "DIFFER", worst_gap, r.seconds);
  return r;
}

// ---------------------------------------------------------------------- A6

CriterionResult check_chi_squared()
{
  Stopwatch clock;
  CriterionResult r = start("A6", "chi-squared endpoints and bounds");
  struct Case
  {
    const char* name;
    Distribution q;
    Channel t;
    std::size_t resolution;
  };
  const std::vector<Case> cases = {
      {"BSC(0.1), q = 0.1", Distribution::bernoulli(0.1), Channel::binary_symmetric(0.1), 4096},
      {"ternary", Distribution({0.5, 0.3, 0.2}),
       Channel::from_rows({{0.7, 0.2, 0.1}, {0.2, 0.6, 0.3}, {0.1, 0.2, 0.6}}), 128},
  };
  bool ok = true;
  for (const Case& c : cases) {
    const double cap = static_cast<double>(c.q.size() - 1);
    const auto f = SimplexFunctional::divergence_from(DivergenceKernel::chi_squared(), c.q);
    const auto g =
        SimplexFunctional::divergence_from(DivergenceKernel::chi_squared(), c.t.apply(c.q));
    const BoundarySolver solver(f, g, c.t, c.q, c.resolution);
    const auto grid = solver.default_lambda_grid(kSteps);
    const BoundaryCurve eb = solver.sweep(Direction::upper, grid);
    const BoundaryCurve epf = solver.sweep(Direction::lower, grid);
    const double chi_xy =
        f_information(DivergenceKernel::chi_squared(), JointDistribution::from_marginal_channel(c.q, c.t));
    const auto& end = eb.points.back();
    const double end_dx = std::abs(end.x - cap);
    const double end_dy = std::abs(end.y - chi_xy);
    double max_x = 0.0;
    for (const auto* curve : {&eb, &epf})
      for (const auto& p : curve->points)
        max_x = std::max(max_x, p.x);
    double origin = 0.0;
    for (const auto* curve : {&eb, &epf})
      origin = std::max({origin, std::abs(curve->points.front().x),
                         std::abs(curve->points.front().y)});
    const bool pass = end_dx <= 1e-9 && end_dy <= 1e-6 && max_x <= cap + 1e-9 && origin <= 1e-12;
    ok = ok && pass;
    r.details.push_back(fmt("%s: EB end (%.9f, %.9f) vs (m-1, chi2(X;Y) = %.9f): |dy| %.1e; max x "
                            "%.9f <= %.0f; origin offset %.1e",
                            c.name, end.x, end.y, chi_xy, end_dy, max_x, cap, origin));
  }
  r.seconds = clock.seconds();
  r.passed = ok;
  r.summary = fmt("endpoint tol 1e-6, x <= m-1 + 1e-9, origin within 1e-12; %zu instances; %.2f s",
                  cases.size(), r.seconds);
  return r;
}

// ---------------------------------------------------------------------- A7

namespace {

struct Tally
{
  std::size_t checks = 0;
  std::size_t violations = 0;
  double worst = 0.0;

  void record(bool ok, double deviation = 0.0)
  {
    ++checks;
    if (!ok)
      ++violations;
    worst = std::max(worst, deviation);
  }
};

double unit(std::mt19937_64& eng)
{
  return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

std::vector<double> random_simplex_point(std::mt19937_64& eng, std::size_t m, double floor)
{
  std::vector<double> v(m);
  double s = 0.0;
  for (auto& x : v) {
    x = floor + unit(eng);
    s += x;
  }
  for (auto& x : v)
    x /= s;
  return v;
}

struct Instance
{
  Distribution q;
  Channel t;
  SimplexFunctional f;
  SimplexFunctional g;
  std::string label;
  std::size_t resolution;
};

Instance random_instance(std::uint64_t seed)
{
  std::mt19937_64 eng(seed);
  const std::size_t m = 2 + seed % 2;
  const std::size_t n = 2 + eng() % 2;
  Distribution q(random_simplex_point(eng, m, 0.15));
  std::vector<Distribution> cols;
  for (std::size_t j = 0; j < m; ++j)
    cols.emplace_back(random_simplex_point(eng, n, 0.02));
  Channel t(cols);
  const Distribution ty = t.apply(q);
  const std::size_t resolution = m == 2 ? 256 : 24;
  switch (eng() % 4) {
  case 0:
    return {q, t, SimplexFunctional::entropy(), SimplexFunctional::entropy(), "entropy", resolution};
  case 1:
    return {q, t, SimplexFunctional::divergence_from(DivergenceKernel::kl(), q),
            SimplexFunctional::divergence_from(DivergenceKernel::kl(), ty), "kl", resolution};
  case 2:
    return {q, t, SimplexFunctional::divergence_from(DivergenceKernel::chi_squared(), q),
            SimplexFunctional::divergence_from(DivergenceKernel::chi_squared(), ty), "chi2",
            resolution};
  default: {
    const double beta = 2.0 + static_cast<double>(eng() % 3);
    return {q, t, SimplexFunctional::norm(beta), SimplexFunctional::norm(beta), "norm", resolution};
  }
  }
}

void envelope_properties(const BoundarySolver& solver, double lambda, Tally& dominance,
                         Tally& idempotence, Tally& convexity, Tally& support)
{
  const PhiGraph phi = solver.graph(lambda);
  const SimplexLattice& lat = solver.lattice();
  const std::size_t m = lat.dimension();
  const double scale = std::max(1.0, graph_scale(phi));
  for (const Direction d : {Direction::lower, Direction::upper}) {
    const double sign = d == Direction::lower ? 1.0 : -1.0;
    const EnvelopeResult env = compute_envelope(phi, d);
    for (std::size_t i = 0; i < lat.size(); ++i) {
      const double over = sign * (env.envelope_values[i] - phi.values[i]);
      dominance.record(over <= 1e-12 * scale, std::max(0.0, over));
    }
    const EnvelopeResult again =
        compute_envelope(graph_from_values(env.envelope_values, solver.lattice_ptr()), d);
    double drift = 0.0;
    for (std::size_t i = 0; i < lat.size(); ++i)
      drift = std::max(drift, std::abs(again.envelope_values[i] - env.envelope_values[i]));
    idempotence.record(drift <= 1e-9 * scale, drift);

    // Second differences along every lattice direction e_a - e_b.
    std::vector<int> k(m);
    for (std::size_t i = 0; i < lat.size(); ++i) {
      const auto c = lat.composition(i);
      for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = a + 1; b < m; ++b) {
          if (c[a] < 1 || c[b] < 1)
            continue;
          std::copy(c.begin(), c.end(), k.begin());
          ++k[a];
          --k[b];
          const auto plus = lat.index_of(k);
          k[a] -= 2;
          k[b] += 2;
          const auto minus = lat.index_of(k);
          const double second = env.envelope_values[*plus] - 2.0 * env.envelope_values[i]
                                + env.envelope_values[*minus];
          convexity.record(sign * second >= -1e-9 * scale, std::max(0.0, -sign * second));
        }
    }

    for (std::size_t i = 0; i < lat.size(); ++i) {
      const auto& s = env.support_sets[i];
      const auto& w = env.support_weights[i];
      double wsum = 0.0;
      double value = 0.0;
      std::vector<double> bary(m, 0.0);
      bool nonneg = true;
      for (std::size_t j = 0; j < s.size(); ++j) {
        nonneg = nonneg && w[j] >= 0.0;
        wsum += w[j];
        value += w[j] * phi.values[s[j]];
        for (std::size_t a = 0; a < m; ++a)
          bary[a] += w[j] * lat.point(s[j])[a];
      }
      double dev = std::max(std::abs(wsum - 1.0), std::abs(value - env.envelope_values[i]) / scale);
      for (std::size_t a = 0; a < m; ++a)
        dev = std::max(dev, std::abs(bary[a] - lat.point(i)[a]));
      support.record(nonneg && s.size() <= m && dev <= 1e-9, dev);
    }
  }
}

}  // namespace

CriterionResult check_properties(std::uint64_t seed)
{
  Stopwatch clock;
  CriterionResult r = start("A7", "property suites");
  constexpr std::uint64_t kSeeds = 200;
  Tally dominance, idempotence, convexity, support, witness, dpi, cardinality, shape, supporting,
      sandwich;

  for (std::uint64_t s = seed; s < seed + kSeeds; ++s) {
    const Instance inst = random_instance(s);
    const std::size_t m = inst.q.size();
    const BoundarySolver solver(inst.f, inst.g, inst.t, inst.q, inst.resolution);
    const auto grid = solver.default_lambda_grid(24);
    for (const std::size_t idx : {std::size_t{0}, grid.size() / 2, grid.size() - 4})
      envelope_properties(solver, grid[idx], dominance, idempotence, convexity, support);

    const BoundaryCurve lower = solver.sweep(Direction::lower, grid);
    const BoundaryCurve upper = solver.sweep(Direction::upper, grid);
    const JointDistribution joint = JointDistribution::from_marginal_channel(inst.q, inst.t);
    const Distribution ty = inst.t.apply(inst.q);

    // Data-processing bounds on y, per functional family.
    double y_lo = -INFINITY;
    double y_hi = INFINITY;
    const KernelKind kind = inst.g.kernel().kind();
    if (kind == KernelKind::kl || kind == KernelKind::chi_squared) {
      y_lo = 0.0;
      y_hi = f_information(inst.g.kernel(), joint);
    } else if (kind == KernelKind::entropy) {
      y_hi = entropy(ty);
      y_lo = 0.0;
      for (std::size_t i = 0; i < m; ++i)
        y_lo += inst.q[i] * entropy(inst.t.column(i));
    } else {
      y_lo = inst.g(ty);
      y_hi = 0.0;
      for (std::size_t i = 0; i < m; ++i)
        y_hi += inst.q[i] * inst.g(inst.t.column(i));
    }

    for (const BoundaryCurve* curve : {&lower, &upper}) {
      const double sign = curve->direction == Direction::lower ? 1.0 : -1.0;
      const auto& pts = curve->points;
      for (const auto& p : pts) {
        const BoundaryPoint re = solver.evaluate(p.witness, p.lambda);
        double dev = std::max(std::abs(re.x - p.x), std::abs(re.y - p.y))
                     / std::max(1.0, std::abs(p.x) + std::abs(p.y));
        if (inst.f.kernel().is_divergence()) {
          const auto w = p.witness.weights();
          const auto c = p.witness.conditionals();
          dev = std::max(dev, std::abs(conditional_f_information(inst.f.kernel(), w, c, inst.q) - p.x)
                                  / std::max(1.0, std::abs(p.x)));
          std::vector<Distribution> pushed;
          for (const auto& ci : c)
            pushed.push_back(inst.t.apply(ci));
          dev = std::max(dev, std::abs(conditional_f_information(inst.g.kernel(), w, pushed, ty) - p.y)
                                  / std::max(1.0, std::abs(p.y)));
        }
        witness.record(dev <= 1e-9, dev);
        const double over = std::max(p.y - y_hi, y_lo - p.y);
        dpi.record(over <= 1e-7, std::max(0.0, over));
        cardinality.record(p.witness.size() <= m + 1);
      }
      // Lower convex, upper concave: slopes monotone.
      for (std::size_t i = 1; i + 1 < pts.size(); ++i) {
        const double s1 = (pts[i].y - pts[i - 1].y) / (pts[i].x - pts[i - 1].x);
        const double s2 = (pts[i + 1].y - pts[i].y) / (pts[i + 1].x - pts[i].x);
        const double bend = sign * (s1 - s2);
        shape.record(bend <= 1e-7 * std::max(1.0, std::abs(s1)), std::max(0.0, bend));
      }
      // Every finite-slope point supports the curve.
      for (const auto& p : pts) {
        if (!std::isfinite(p.lambda))
          continue;
        double worst = 0.0;
        for (const auto& o : pts)
          worst = std::max(worst, sign * ((p.y - p.lambda * p.x) - (o.y - p.lambda * o.x)));
        supporting.record(worst <= 1e-7, worst);
      }
    }
    const bool same_ends = std::abs(lower.points.front().x - upper.points.front().x) <= 1e-12
                           && std::abs(lower.points.back().x - upper.points.back().x) <= 1e-12
                           && std::abs(lower.points.front().y - upper.points.front().y) <= 1e-12
                           && std::abs(lower.points.back().y - upper.points.back().y) <= 1e-12;
    shape.record(same_ends);
    if (inst.f.depends_on_reference())
      shape.record(std::abs(lower.points.front().x) <= 1e-12 && std::abs(lower.points.front().y) <= 1e-12);

    // Closed-form sandwich on a random binary symmetric instance.
    std::mt19937_64 eng(s ^ 0xC0FFEEULL);
    const BscInstance bsc(0.02 + 0.48 * unit(eng), 0.5 * unit(eng));
    const double hq = binary_entropy(bsc.q);
    for (int k = 0; k <= 40; ++k) {
      const double x = hq * k / 40.0;
      const double lo = mgl(bsc, x);
      const double hi = mr_gerber(bsc, x);
      sandwich.record(lo <= hi + 1e-9, std::max(0.0, lo - hi));
      if (k == 0 || k == 40)
        sandwich.record(std::abs(lo - hi) <= 1e-9, std::abs(lo - hi));
    }
    const double beta = 2.0 + static_cast<double>(eng() % 3);
    const double kq = arimoto_mgl(bsc, beta, bsc.q).first;
    for (int k = 0; k <= 20; ++k) {
      const double x = kq + (1.0 - kq) * k / 20.0;
      const double lo = arimoto_mgl_at(bsc, beta, x);
      const double hi = arimoto_mr_gerber_at(bsc, beta, x);
      sandwich.record(lo <= hi + 1e-9, std::max(0.0, lo - hi));
    }
  }

  auto line = [&](const char* name, const Tally& t) {
    r.details.push_back(fmt("%-26s %8zu checks, %zu violations, worst %.1e", name, t.checks,
                            t.violations, t.worst));
  };
  line("envelope dominance", dominance);
  line("envelope idempotence", idempotence);
  line("envelope convexity", convexity);
  line("support-set validity", support);
  line("witness consistency", witness);
  line("data-processing bound", dpi);
  line("witness cardinality", cardinality);
  line("curve shape", shape);
  line("supporting-line property", supporting);
  line("closed-form sandwich", sandwich);
  std::size_t total = 0;
  for (const Tally* t : {&dominance, &idempotence, &convexity, &support, &witness, &dpi,
                         &cardinality, &shape, &supporting, &sandwich})
    total += t->violations;
  r.seconds = clock.seconds();
  r.passed = total == 0;
  r.summary = fmt("%llu seeds from %llu (m in {2, 3}), %zu violations; %.2f s",
                  static_cast<unsigned long long>(kSeeds), static_cast<unsigned long long>(seed),
                  total, r.seconds);
  return r;
}

// ------------------------------------------------------------------ suites

const std::vector<std::string>& acceptance_suites()
{
  static const std::vector<std::string> names = {"mgl",     "mrgl", "arimoto",    "oracle-cross",
                                                 "matched", "chi2", "properties", "all"};
  return names;
}

std::vector<CriterionResult> run_acceptance_suite(const std::string& suite, std::uint64_t seed)
{
  std::vector<CriterionResult> out;
  const bool all = suite == "all";
  if (all || suite == "mgl")
    out.push_back(check_mgl_exactness());
  if (all || suite == "mrgl")
    out.push_back(check_mr_gerber_exactness());
  if (all || suite == "arimoto")
    out.push_back(check_arimoto());
  if (all || suite == "oracle-cross")
    out.push_back(check_oracle_cross(seed));
  if (all || suite == "matched")
    out.push_back(check_matched_channels());
  if (all || suite == "chi2")
    out.push_back(check_chi_squared());
  if (all || suite == "properties")
    out.push_back(check_properties(seed));
  if (out.empty())
    throw std::invalid_argument("unknown suite '" + suite + "'");
  return out;
}

std::string format_result(const CriterionResult& r, bool with_details)
{
  std::string s = r.id + (r.passed ? " PASS " : " FAIL ") + r.title + ": " + r.summary + "\n";
  if (with_details)
    for (const auto& d : r.details)
      s += "    " + d + "\n";
  return s;
}

}  // namespace bottleneck
