#pragma once

// Graph of phi(p, lambda) = g(T p) - lambda f(p) over a composition lattice of
// the simplex, and its lower convex / upper concave envelope with the
// supporting lattice points of every envelope value.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "bottleneck/core_prob.hpp"

namespace bottleneck {

enum class Direction
{
  lower,
  upper,
};

std::string to_string(Direction d);
Direction direction_from_string(const std::string& s);

/// Default lattice resolution N for alphabet size m.
std::size_t default_resolution(std::size_t m);

/// Largest lattice the envelope code will build.
inline constexpr std::size_t kMaxLatticePoints = 4'000'000;

/// Absolute tolerance on the envelope gap at q separating trivial from
/// non-trivial supporting points.
inline constexpr double kTrivialGapTolerance = 1e-7;

/// All compositions (k_1, ..., k_m) / N with sum k_i = N, ordered
/// lexicographically by (k_1, ..., k_{m-1}).  For m = 2 point i is
/// [i / N, 1 - i / N].
class SimplexLattice
{
public:
  SimplexLattice(std::size_t m, std::size_t resolution);

  /// C(N + m - 1, m - 1); throws std::length_error past kMaxLatticePoints.
  static std::size_t count(std::size_t m, std::size_t resolution);

  std::size_t dimension() const noexcept { return m_; }
  std::size_t resolution() const noexcept { return n_; }
  std::size_t size() const noexcept { return size_; }

  std::span<const int> composition(std::size_t i) const
  {
    return {compositions_.data() + i * m_, m_};
  }
  std::span<const double> point(std::size_t i) const { return {points_.data() + i * m_, m_}; }
  Distribution distribution(std::size_t i) const;

  std::optional<std::size_t> index_of(std::span<const int> composition) const;
  /// Index of the vertex e_i.
  std::size_t vertex_index(std::size_t i) const;
  /// Nearest lattice point to q (largest-remainder rounding of N q).
  std::size_t snap(std::span<const double> q) const;
  std::size_t snap(const Distribution& q) const { return snap(q.probs()); }

private:
  std::uint64_t key(std::span<const int> composition) const;

  std::size_t m_;
  std::size_t n_;
  std::size_t size_;
  std::vector<int> compositions_;
  std::vector<double> points_;
  std::unordered_map<std::uint64_t, std::size_t> index_;
};

/// f(p_i) and g(T p_i) at every lattice point.  Shared by every lambda.
struct FunctionalTable
{
  std::vector<double> x_values;
  std::vector<double> y_values;
};

/// Evaluates both functionals on the lattice; a failure at any point is
/// rethrown with the offending point in the message.
FunctionalTable evaluate_functionals(const SimplexFunctional& f, const SimplexFunctional& g,
                                     const Channel& t, const SimplexLattice& lattice);

struct PhiGraph
{
  std::shared_ptr<const SimplexLattice> lattice;
  std::shared_ptr<const FunctionalTable> table;
  double lambda = 0.0;
  /// values[i] = y_values[i] - lambda * x_values[i].
  std::vector<double> values;

  std::span<const double> x_values() const { return table->x_values; }
  std::span<const double> y_values() const { return table->y_values; }
};

PhiGraph build_phi_graph(const SimplexFunctional& f, const SimplexFunctional& g, const Channel& t,
                         double lambda, std::shared_ptr<const SimplexLattice> lattice);
PhiGraph phi_graph_from_table(std::shared_ptr<const FunctionalTable> table, double lambda,
                              std::shared_ptr<const SimplexLattice> lattice);

/// A graph whose values are given directly (no f / g split); x_values are
/// zero and y_values equal the values.  Used to take envelopes of envelopes.
PhiGraph graph_from_values(std::vector<double> values,
                           std::shared_ptr<const SimplexLattice> lattice);

struct EnvelopeResult
{
  Direction direction = Direction::lower;
  std::vector<double> envelope_values;
  /// Lattice indices whose convex combination realizes the envelope value.
  std::vector<std::vector<std::size_t>> support_sets;
  /// Barycentric weights, parallel to support_sets.
  std::vector<std::vector<double>> support_weights;
  std::vector<bool> touches;
  /// Envelope-side hull facets as lattice indices (segments when m = 2).
  std::vector<std::vector<std::size_t>> facets;
  /// All lifted points were affinely dependent; the envelope is the graph.
  bool degenerate = false;
};

/// Magnitude used for relative tolerances: max_i |y_i| + |lambda| |x_i|.
double graph_scale(const PhiGraph& graph);
/// Envelope and graph are considered equal below this distance.
double touch_tolerance(const PhiGraph& graph);

/// Monotone-chain hull of the m = 2 graph.
EnvelopeResult lower_envelope_1d(const PhiGraph& graph);
EnvelopeResult upper_envelope_1d(const PhiGraph& graph);

/// Hull of the lifted points (k_1, ..., k_{m-1}, phi) for 2 <= m <= 4.
EnvelopeResult envelope_general(const PhiGraph& graph, Direction direction);

/// 1-D path for m = 2, general path otherwise.
EnvelopeResult compute_envelope(const PhiGraph& graph, Direction direction);

struct EnvelopeGap
{
  double gap = 0.0;
  std::size_t query_index = 0;
  /// (weight, conditional) pairs; {(1, q)} whenever gap <= kTrivialGapTolerance.
  std::vector<std::pair<double, Distribution>> support;
  std::vector<std::size_t> support_indices;
};

/// Trivial-case test at q, after snapping q to the lattice.
EnvelopeGap envelope_gap_at(const EnvelopeResult& result, const PhiGraph& graph,
                            const Distribution& q);

struct EnvelopeSupport
{
  double value = 0.0;
  /// Facet vertices carrying positive weight, with their weights.
  std::vector<std::size_t> indices;
  std::vector<double> weights;
};

/// Envelope at an arbitrary simplex point by interpolation over the facet
/// containing it.  Empty when no facet covers the point.
std::optional<EnvelopeSupport> envelope_support_at(const EnvelopeResult& result,
                                                   const PhiGraph& graph,
                                                   std::span<const double> point);
std::optional<double> envelope_value_at(const EnvelopeResult& result, const PhiGraph& graph,
                                        std::span<const double> point);

/// Debug dump: p_1..p_m, f, g, phi, envelope, touches.
void write_envelope_csv(std::ostream& out, const PhiGraph& graph, const EnvelopeResult& result);

}  // namespace bottleneck
