// Electric networks with i.i.d. resistances and effective resistances.
#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "interlace/percolation.hpp"
#include "interlace/rng.hpp"

namespace interlace {

class WindowSampler;

/// Resistance law: constant(c), uniform(a, b), or an exponential(lambda)
/// variable raised to at least `floor`.
struct ResistanceLaw {
  enum class Kind { constant, uniform, exponential_truncated };
  Kind kind = Kind::constant;
  double a = 1.0;  // c, lower bound, or rate
  double b = 1.0;  // upper bound or floor

  static ResistanceLaw constant(double c);
  static ResistanceLaw uniform(double lo, double hi);
  static ResistanceLaw exponential_truncated(double rate, double floor);
  /// "constant:1", "uniform:1:2", "exponential:2:0.1".
  static ResistanceLaw parse(const std::string& text);

  void validate() const;  // throws unless draws are strictly positive
  double draw(Rng& rng) const;
  std::string str() const;
};

std::vector<double> assign_resistances(std::size_t edge_count, const ResistanceLaw& law, Rng& rng);

struct ResistorNetwork {
  std::size_t vertex_count = 0;
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  std::vector<double> resistance;  // per edge, > 0
  std::size_t source = 0;
  std::vector<std::size_t> sinks;
};

struct SolverOptions {
  double tolerance = 1e-8;         // relative residual of the Dirichlet system
  std::size_t max_iterations = 0;  // 0: 10 * unknowns + 100
};

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kInfiniteResistance = std::numeric_limits<double>::infinity();

/// Unit potential at the source, zero on the sinks; returns 1 / (current
/// leaving the source), 0 when the source is a sink and +inf when no sink is
/// reachable. Conjugate gradients with Jacobi preconditioning on the
/// source's component.
double effective_resistance(const ResistorNetwork& net, SolverOptions opt = {});

/// The network of open edges of `cfg` inside B(source, N) ∩ window, with
/// sinks the vertices at l∞-distance exactly N from the source.
/// `edge_resistance` is indexed like the window edges.
ResistorNetwork ball_network(const Configuration& cfg, const std::vector<double>& edge_resistance, const Point& source,
                             int N);

/// R_eff(source <-> sphere of radius N around the source) for every N in the
/// grid, using ball_network.
std::vector<double> resistance_profile(const Configuration& cfg, const std::vector<double>& edge_resistance,
                                       const Point& source, std::span<const int> Ns, SolverOptions opt = {});

struct TransienceReplica {
  Point source;                   // vertex of the largest cluster nearest the centre
  std::size_t cluster_size = 0;
  std::vector<double> resistance;  // per N
};

struct TransienceSummary {
  std::vector<int> Ns;
  std::vector<double> q1, median, q3;  // over replicas, per N
  std::vector<TransienceReplica> replicas;
  std::size_t monotonicity_violations = 0;
};

/// Effective resistance from the largest cluster of the sampled edge trace
/// (its vertex nearest the window centre) to the spheres of radius N around
/// that vertex, for replicas drawn by `sampler` at level u. Spheres are
/// clipped to the window. Replica r uses derive_seed(seed, r, "resistance").
TransienceSummary transience_profile(const WindowSampler& sampler, double u, std::span<const int> Ns,
                                     const ResistanceLaw& law, std::size_t replicas, std::uint64_t seed,
                                     int threads = 1);

}  // namespace interlace
