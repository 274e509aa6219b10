#include "bottleneck/envelope.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "bottleneck/detail/lifted_hull.hpp"
#include "bottleneck/parallel.hpp"

namespace bottleneck {

std::string to_string(Direction d)
{
  return d == Direction::lower ? "lower" : "upper";
}

Direction direction_from_string(const std::string& s)
{
  if (s == "lower")
    return Direction::lower;
  if (s == "upper")
    return Direction::upper;
  throw std::invalid_argument("unknown direction '" + s + "'");
}

std::size_t default_resolution(std::size_t m)
{
  switch (m) {
  case 2:
    return 4096;
  case 3:
    return 128;
  case 4:
    return 32;
  default:
    throw std::invalid_argument("envelopes are limited to alphabets of size 2..4");
  }
}

// ---------------------------------------------------------------- lattice

std::size_t SimplexLattice::count(std::size_t m, std::size_t resolution)
{
  // C(N + m - 1, m - 1) computed incrementally; each prefix is an integer.
  long double c = 1.0L;
  std::size_t exact = 1;
  for (std::size_t j = 1; j < m; ++j) {
    c = c * static_cast<long double>(resolution + j) / static_cast<long double>(j);
    if (c > static_cast<long double>(kMaxLatticePoints))
      throw std::length_error("SimplexLattice: lattice exceeds the point budget");
    exact = exact * (resolution + j) / j;
  }
  return exact;
}

SimplexLattice::SimplexLattice(std::size_t m, std::size_t resolution) : m_(m), n_(resolution)
{
  if (m < 2)
    throw std::invalid_argument("SimplexLattice: m must be at least 2");
  if (resolution < 1)
    throw std::invalid_argument("SimplexLattice: resolution must be positive");
  size_ = count(m, resolution);
  long double span = 1.0L;
  for (std::size_t j = 1; j < m; ++j)
    span *= static_cast<long double>(resolution + 1);
  if (span > 1.8e19L)
    throw std::length_error("SimplexLattice: composition keys overflow");

  compositions_.reserve(size_ * m);
  points_.reserve(size_ * m);
  std::vector<int> k(m, 0);
  const int total = static_cast<int>(resolution);
  // Odometer over (k_1, ..., k_{m-1}) in lexicographic order.
  while (true) {
    int used = 0;
    for (std::size_t j = 0; j + 1 < m; ++j)
      used += k[j];
    k[m - 1] = total - used;
    index_.emplace(key(k), compositions_.size() / m);
    for (std::size_t j = 0; j < m; ++j) {
      compositions_.push_back(k[j]);
      points_.push_back(static_cast<double>(k[j]) / static_cast<double>(resolution));
    }
    // Increment the last free coordinate that still has room.
    std::size_t j = m - 1;
    bool advanced = false;
    while (j-- > 0) {
      int prefix = 0;
      for (std::size_t t = 0; t < j; ++t)
        prefix += k[t];
      if (prefix + k[j] < total) {
        ++k[j];
        for (std::size_t t = j + 1; t + 1 < m; ++t)
          k[t] = 0;
        advanced = true;
        break;
      }
    }
    if (!advanced)
      break;
  }
}

std::uint64_t SimplexLattice::key(std::span<const int> composition) const
{
  std::uint64_t k = 0;
  for (std::size_t j = 0; j + 1 < m_; ++j)
    k = k * (n_ + 1) + static_cast<std::uint64_t>(composition[j]);
  return k;
}

Distribution SimplexLattice::distribution(std::size_t i) const
{
  const auto p = point(i);
  return Distribution(std::vector<double>(p.begin(), p.end()));
}

std::optional<std::size_t> SimplexLattice::index_of(std::span<const int> composition) const
{
  if (composition.size() != m_)
    return std::nullopt;
  int sum = 0;
  for (int v : composition) {
    if (v < 0)
      return std::nullopt;
    sum += v;
  }
  if (sum != static_cast<int>(n_))
    return std::nullopt;
  const auto it = index_.find(key(composition));
  if (it == index_.end())
    return std::nullopt;
  return it->second;
}

std::size_t SimplexLattice::vertex_index(std::size_t i) const
{
  std::vector<int> k(m_, 0);
  k.at(i) = static_cast<int>(n_);
  return *index_of(k);
}

std::size_t SimplexLattice::snap(std::span<const double> q) const
{
  if (q.size() != m_)
    throw std::invalid_argument("SimplexLattice::snap: alphabet mismatch");
  std::vector<int> k(m_);
  std::vector<std::pair<double, std::size_t>> remainders(m_);
  int used = 0;
  for (std::size_t j = 0; j < m_; ++j) {
    const double scaled = q[j] * static_cast<double>(n_);
    k[j] = static_cast<int>(std::floor(scaled));
    used += k[j];
    remainders[j] = {scaled - std::floor(scaled), j};
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (int r = 0; r < static_cast<int>(n_) - used; ++r)
    ++k[remainders[static_cast<std::size_t>(r) % m_].second];
  return *index_of(k);
}

// ------------------------------------------------------------------ graphs

FunctionalTable evaluate_functionals(const SimplexFunctional& f, const SimplexFunctional& g,
                                     const Channel& t, const SimplexLattice& lattice)
{
  if (t.inputs() != lattice.dimension())
    throw std::invalid_argument("evaluate_functionals: channel input alphabet != lattice dimension");
  FunctionalTable table;
  table.x_values.resize(lattice.size());
  table.y_values.resize(lattice.size());
  parallel_for(lattice.size(), [&](std::size_t i) {
    const auto p = lattice.point(i);
    try {
      table.x_values[i] = f(p);
      table.y_values[i] = g(t.apply(p));
    } catch (const std::exception& e) {
      std::ostringstream msg;
      msg << "functional evaluation failed at lattice point " << i << " [";
      for (std::size_t j = 0; j < p.size(); ++j)
        msg << (j ? ", " : "") << p[j];
      msg << "]: " << e.what();
      throw std::domain_error(msg.str());
    }
  });
  return table;
}

PhiGraph phi_graph_from_table(std::shared_ptr<const FunctionalTable> table, double lambda,
                              std::shared_ptr<const SimplexLattice> lattice)
{
  PhiGraph graph;
  graph.values.resize(table->x_values.size());
  for (std::size_t i = 0; i < graph.values.size(); ++i)
    graph.values[i] = table->y_values[i] - lambda * table->x_values[i];
  graph.lattice = std::move(lattice);
  graph.table = std::move(table);
  graph.lambda = lambda;
  return graph;
}

PhiGraph build_phi_graph(const SimplexFunctional& f, const SimplexFunctional& g, const Channel& t,
                         double lambda, std::shared_ptr<const SimplexLattice> lattice)
{
  auto table = std::make_shared<const FunctionalTable>(evaluate_functionals(f, g, t, *lattice));
  return phi_graph_from_table(std::move(table), lambda, std::move(lattice));
}

PhiGraph graph_from_values(std::vector<double> values,
                           std::shared_ptr<const SimplexLattice> lattice)
{
  if (values.size() != lattice->size())
    throw std::invalid_argument("graph_from_values: one value per lattice point required");
  auto table = std::make_shared<FunctionalTable>();
  table->x_values.assign(values.size(), 0.0);
  table->y_values = values;
  PhiGraph graph;
  graph.lattice = std::move(lattice);
  graph.table = std::move(table);
  graph.lambda = 0.0;
  graph.values = std::move(values);
  return graph;
}

double graph_scale(const PhiGraph& graph)
{
  const auto xs = graph.x_values();
  const auto ys = graph.y_values();
  const double lam = std::abs(graph.lambda);
  double s = 0.0;
  for (std::size_t i = 0; i < graph.values.size(); ++i)
    s = std::max(s, std::abs(ys[i]) + lam * std::abs(xs[i]));
  return s;
}

double touch_tolerance(const PhiGraph& graph)
{
  return 1e-12 * std::max(1.0, graph_scale(graph));
}

// --------------------------------------------------------------- envelopes

namespace {

EnvelopeResult make_result(Direction direction, std::size_t n)
{
  EnvelopeResult r;
  r.direction = direction;
  r.envelope_values.resize(n);
  r.support_sets.resize(n);
  r.support_weights.resize(n);
  r.touches.assign(n, false);
  return r;
}

void set_touch(EnvelopeResult& r, std::span<const double> values, std::size_t i)
{
  r.envelope_values[i] = values[i];
  r.support_sets[i] = {i};
  r.support_weights[i] = {1.0};
  r.touches[i] = true;
}

/// Lower envelope of `values`; callers negate for the upper direction.
EnvelopeResult monotone_chain_lower(std::span<const double> values, double tol, Direction tag)
{
  const std::size_t n = values.size();
  EnvelopeResult r = make_result(tag, n);
  std::vector<std::size_t> hull;
  hull.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    while (hull.size() >= 2) {
      const std::size_t a = hull[hull.size() - 2];
      const std::size_t b = hull.back();
      const double chord = values[a]
                           + (values[i] - values[a]) * static_cast<double>(b - a)
                                 / static_cast<double>(i - a);
      // Keep b only when it turns strictly below the chord.
      if (values[b] < chord - tol)
        break;
      hull.pop_back();
    }
    hull.push_back(i);
  }

  for (std::size_t h = 0; h < hull.size(); ++h) {
    set_touch(r, values, hull[h]);
    if (h + 1 == hull.size())
      break;
    const std::size_t a = hull[h];
    const std::size_t b = hull[h + 1];
    r.facets.push_back({a, b});
    for (std::size_t i = a + 1; i < b; ++i) {
      const double wb = static_cast<double>(i - a) / static_cast<double>(b - a);
      const double wa = 1.0 - wb;
      const double env = wa * values[a] + wb * values[b];
      if (values[i] - env <= tol) {
        set_touch(r, values, i);
      } else {
        r.envelope_values[i] = env;
        r.support_sets[i] = {a, b};
        r.support_weights[i] = {wa, wb};
      }
    }
  }
  return r;
}

void negate_values(EnvelopeResult& r)
{
  for (double& v : r.envelope_values)
    v = -v;
}

std::vector<double> oriented_values(const PhiGraph& graph, Direction direction)
{
  std::vector<double> v = graph.values;
  if (direction == Direction::upper)
    for (double& x : v)
      x = -x;
  return v;
}

}  // namespace

EnvelopeResult lower_envelope_1d(const PhiGraph& graph)
{
  if (graph.lattice->dimension() != 2)
    throw std::invalid_argument("lower_envelope_1d: requires m = 2");
  return monotone_chain_lower(graph.values, touch_tolerance(graph), Direction::lower);
}

EnvelopeResult upper_envelope_1d(const PhiGraph& graph)
{
  if (graph.lattice->dimension() != 2)
    throw std::invalid_argument("upper_envelope_1d: requires m = 2");
  const auto flipped = oriented_values(graph, Direction::upper);
  EnvelopeResult r = monotone_chain_lower(flipped, touch_tolerance(graph), Direction::upper);
  negate_values(r);
  return r;
}

EnvelopeResult envelope_general(const PhiGraph& graph, Direction direction)
{
  const SimplexLattice& lattice = *graph.lattice;
  const std::size_t m = lattice.dimension();
  if (m < 2 || m > 4)
    throw std::invalid_argument("envelope_general: supports 2 <= m <= 4");
  const std::size_t n = lattice.size();
  const std::size_t base_dim = m - 1;
  const auto values = oriented_values(graph, direction);
  const double tol = touch_tolerance(graph);
  EnvelopeResult r = make_result(direction, n);

  // Fixed-point heights.  Bits are budgeted so that every orientation
  // determinant fits comfortably in 127 bits.
  double scale = graph_scale(graph);
  for (double v : values)
    scale = std::max(scale, std::abs(v));
  const double coord_bits = std::ceil(std::log2(static_cast<double>(lattice.resolution()) + 1.0)) + 1;
  const double height_bits = std::min(44.0, 118.0 - 2.0 * static_cast<double>(base_dim) * coord_bits);
  if (height_bits < 24.0)
    throw std::length_error("envelope_general: lattice resolution too large for exact predicates");

  bool degenerate = scale == 0.0;
  detail::LiftedHull hull;
  if (!degenerate) {
    const double quantum = std::ldexp(1.0, static_cast<int>(height_bits)) / scale;
    std::vector<std::int64_t> coords(n * m);
    for (std::size_t i = 0; i < n; ++i) {
      const auto k = lattice.composition(i);
      for (std::size_t j = 0; j < base_dim; ++j)
        coords[i * m + j] = k[j];
      coords[i * m + base_dim] = std::llround(values[i] * quantum);
    }
    std::vector<std::uint32_t> base(m);
    for (std::size_t j = 0; j < m; ++j)
      base[j] = static_cast<std::uint32_t>(lattice.vertex_index(j));
    hull = detail::lower_hull(coords, m, base);
    degenerate = hull.degenerate;
  }

  if (degenerate) {
    r.degenerate = true;
    for (std::size_t i = 0; i < n; ++i)
      set_touch(r, values, i);
    if (direction == Direction::upper)
      negate_values(r);
    return r;
  }

  std::vector<char> assigned(n, 0);
  std::vector<int> lo(base_dim), hi(base_dim), cur(base_dim);
  std::vector<int> comp(m);
  std::vector<detail::Int128> mat(base_dim * base_dim);
  std::vector<std::vector<std::int64_t>> corner(m, std::vector<std::int64_t>(base_dim));
  const int total = static_cast<int>(lattice.resolution());

  for (const auto& facet : hull.lower_facets) {
    std::vector<std::size_t> verts(facet.begin(), facet.end());
    r.facets.push_back(verts);
    for (std::size_t v = 0; v < m; ++v) {
      const auto k = lattice.composition(verts[v]);
      for (std::size_t j = 0; j < base_dim; ++j)
        corner[v][j] = k[j];
    }
    for (std::size_t j = 0; j < base_dim; ++j) {
      lo[j] = std::numeric_limits<int>::max();
      hi[j] = std::numeric_limits<int>::min();
      for (std::size_t v = 0; v < m; ++v) {
        lo[j] = std::min<int>(lo[j], static_cast<int>(corner[v][j]));
        hi[j] = std::max<int>(hi[j], static_cast<int>(corner[v][j]));
      }
    }
    for (std::size_t row = 0; row < base_dim; ++row)
      for (std::size_t c = 0; c < base_dim; ++c)
        mat[row * base_dim + c] = corner[c + 1][row] - corner[0][row];
    const detail::Int128 det = detail::determinant(mat, base_dim);
    if (det == 0)
      continue;

    cur = lo;
    while (true) {
      int used = 0;
      for (std::size_t j = 0; j < base_dim; ++j)
        used += cur[j];
      if (used <= total) {
        for (std::size_t j = 0; j < base_dim; ++j)
          comp[j] = cur[j];
        comp[base_dim] = total - used;
        const std::size_t idx = *lattice.index_of(comp);
        if (!assigned[idx]) {
          // Cramer numerators for the weights of vertices 1..base_dim.
          std::vector<detail::Int128> num(m, 0);
          detail::Int128 rest = det;
          bool inside = true;
          for (std::size_t v = 1; v < m && inside; ++v) {
            auto local = mat;
            for (std::size_t row = 0; row < base_dim; ++row)
              local[row * base_dim + (v - 1)] = cur[row] - corner[0][row];
            num[v] = detail::determinant(local, base_dim);
            rest -= num[v];
            if ((det > 0 && num[v] < 0) || (det < 0 && num[v] > 0))
              inside = false;
          }
          num[0] = rest;
          if (inside && !((det > 0 && num[0] < 0) || (det < 0 && num[0] > 0))) {
            assigned[idx] = 1;
            double env = 0.0;
            std::vector<std::size_t> support;
            std::vector<double> weights;
            for (std::size_t v = 0; v < m; ++v) {
              if (num[v] == 0)
                continue;
              const double w = static_cast<double>(num[v]) / static_cast<double>(det);
              support.push_back(verts[v]);
              weights.push_back(w);
              env += w * values[verts[v]];
            }
            if (values[idx] - env <= tol || support.size() == 1) {
              set_touch(r, values, idx);
            } else {
              r.envelope_values[idx] = env;
              r.support_sets[idx] = std::move(support);
              r.support_weights[idx] = std::move(weights);
            }
          }
        }
      }
      // Advance the bounding-box odometer.
      std::size_t j = base_dim;
      bool advanced = false;
      while (j-- > 0) {
        if (cur[j] < hi[j]) {
          ++cur[j];
          for (std::size_t t = j + 1; t < base_dim; ++t)
            cur[t] = lo[t];
          advanced = true;
          break;
        }
      }
      if (!advanced)
        break;
    }
  }

  for (std::size_t i = 0; i < n; ++i)
    if (!assigned[i])
      throw std::logic_error("envelope_general: lattice point not covered by any hull facet");

  if (direction == Direction::upper)
    negate_values(r);
  return r;
}

EnvelopeResult compute_envelope(const PhiGraph& graph, Direction direction)
{
  if (graph.lattice->dimension() == 2)
    return direction == Direction::lower ? lower_envelope_1d(graph) : upper_envelope_1d(graph);
  return envelope_general(graph, direction);
}

EnvelopeGap envelope_gap_at(const EnvelopeResult& result, const PhiGraph& graph,
                            const Distribution& q)
{
  EnvelopeGap out;
  out.query_index = graph.lattice->snap(q);
  const std::size_t i = out.query_index;
  out.gap = std::abs(graph.values[i] - result.envelope_values[i]);
  if (out.gap <= kTrivialGapTolerance || result.touches[i]) {
    out.support.emplace_back(1.0, graph.lattice->distribution(i));
    out.support_indices = {i};
    return out;
  }
  for (std::size_t k = 0; k < result.support_sets[i].size(); ++k) {
    out.support.emplace_back(result.support_weights[i][k],
                             graph.lattice->distribution(result.support_sets[i][k]));
    out.support_indices.push_back(result.support_sets[i][k]);
  }
  return out;
}

namespace {

EnvelopeSupport finish_support(const EnvelopeResult& result, std::span<const std::size_t> verts,
                               std::span<const double> w)
{
  constexpr double kDropWeight = 1e-12;
  EnvelopeSupport s;
  double total = 0.0;
  for (std::size_t k = 0; k < verts.size(); ++k) {
    s.value += w[k] * result.envelope_values[verts[k]];
    if (w[k] > kDropWeight) {
      s.indices.push_back(verts[k]);
      s.weights.push_back(w[k]);
      total += w[k];
    }
  }
  for (double& x : s.weights)
    x /= total;
  return s;
}

}  // namespace

std::optional<EnvelopeSupport> envelope_support_at(const EnvelopeResult& result,
                                                   const PhiGraph& graph,
                                                   std::span<const double> point)
{
  const SimplexLattice& lattice = *graph.lattice;
  const std::size_t m = lattice.dimension();
  if (point.size() != m)
    throw std::invalid_argument("envelope_support_at: alphabet mismatch");
  const double scale = static_cast<double>(lattice.resolution());
  constexpr double kSlack = 1e-9;

  if (result.degenerate) {
    // Affine graph: the vertices interpolate it.
    std::vector<std::size_t> verts(m);
    for (std::size_t j = 0; j < m; ++j)
      verts[j] = lattice.vertex_index(j);
    return finish_support(result, verts, point);
  }

  if (m == 2) {
    const double t = point[0] * scale;
    auto it = std::lower_bound(result.facets.begin(), result.facets.end(), t,
                               [](const std::vector<std::size_t>& f, double v) {
                                 return static_cast<double>(f[1]) < v;
                               });
    if (it == result.facets.end()) {
      if (result.facets.empty() || t > static_cast<double>(result.facets.back()[1]) + kSlack)
        return std::nullopt;
      --it;
    }
    const double a = static_cast<double>((*it)[0]);
    const double b = static_cast<double>((*it)[1]);
    if (t < a - kSlack)
      return std::nullopt;
    const double wb = std::clamp((t - a) / (b - a), 0.0, 1.0);
    const double w[2] = {1.0 - wb, wb};
    return finish_support(result, *it, w);
  }

  const std::size_t base_dim = m - 1;
  std::vector<double> a(base_dim * base_dim), rhs(base_dim), w(m);
  for (const auto& facet : result.facets) {
    if (facet.size() != m)
      continue;
    for (std::size_t row = 0; row < base_dim; ++row) {
      const double origin = lattice.composition(facet[0])[row];
      for (std::size_t c = 0; c < base_dim; ++c)
        a[row * base_dim + c] = lattice.composition(facet[c + 1])[row] - origin;
      rhs[row] = point[row] * scale - origin;
    }
    // Gaussian elimination with partial pivoting for the weights of
    // vertices 1..base_dim.
    bool singular = false;
    for (std::size_t col = 0; col < base_dim; ++col) {
      std::size_t piv = col;
      for (std::size_t row = col + 1; row < base_dim; ++row)
        if (std::abs(a[row * base_dim + col]) > std::abs(a[piv * base_dim + col]))
          piv = row;
      if (std::abs(a[piv * base_dim + col]) < 1e-12) {
        singular = true;
        break;
      }
      if (piv != col) {
        for (std::size_t c = 0; c < base_dim; ++c)
          std::swap(a[piv * base_dim + c], a[col * base_dim + c]);
        std::swap(rhs[piv], rhs[col]);
      }
      for (std::size_t row = col + 1; row < base_dim; ++row) {
        const double factor = a[row * base_dim + col] / a[col * base_dim + col];
        for (std::size_t c = col; c < base_dim; ++c)
          a[row * base_dim + c] -= factor * a[col * base_dim + c];
        rhs[row] -= factor * rhs[col];
      }
    }
    if (singular)
      continue;
    for (std::size_t col = base_dim; col-- > 0;) {
      double s = rhs[col];
      for (std::size_t c = col + 1; c < base_dim; ++c)
        s -= a[col * base_dim + c] * w[c + 1];
      w[col + 1] = s / a[col * base_dim + col];
    }
    double w0 = 1.0;
    for (std::size_t v = 1; v < m; ++v)
      w0 -= w[v];
    w[0] = w0;
    if (std::all_of(w.begin(), w.end(), [](double x) { return x >= -kSlack; })) {
      for (double& x : w)
        x = std::max(x, 0.0);
      return finish_support(result, facet, w);
    }
  }
  return std::nullopt;
}

std::optional<double> envelope_value_at(const EnvelopeResult& result, const PhiGraph& graph,
                                        std::span<const double> point)
{
  const auto s = envelope_support_at(result, graph, point);
  if (!s)
    return std::nullopt;
  return s->value;
}

void write_envelope_csv(std::ostream& out, const PhiGraph& graph, const EnvelopeResult& result)
{
  const std::size_t m = graph.lattice->dimension();
  for (std::size_t j = 0; j < m; ++j)
    out << "p_" << (j + 1) << ',';
  out << "f,g,phi,envelope,touches\n";
  const auto old_precision = out.precision(17);
  for (std::size_t i = 0; i < graph.values.size(); ++i) {
    for (double p : graph.lattice->point(i))
      out << p << ',';
    out << graph.x_values()[i] << ',' << graph.y_values()[i] << ',' << graph.values[i] << ','
        << result.envelope_values[i] << ',' << (result.touches[i] ? 1 : 0) << '\n';
  }
  out.precision(old_precision);
}

}  // namespace bottleneck
