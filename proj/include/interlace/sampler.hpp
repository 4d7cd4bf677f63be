// Sampling the interlacement point process restricted to a window.
#pragma once

#include <cstddef>
#include <limits>
#include <memory>
#include <span>
#include <vector>

#include "interlace/fields.hpp"
#include "interlace/green.hpp"
#include "interlace/potential.hpp"
#include "interlace/rng.hpp"

namespace interlace {

enum class SampleMode { exact, truncated };

struct SamplerOptions {
  SampleMode mode = SampleMode::exact;
  int safety_radius = 0;  // truncated mode; 0 means 4 * window l∞-radius
  bool keep_traces = false;
  PotentialOptions potential{};
};

/// Window part of one trajectory: the visited vertices in visiting order and
/// the traversed window edges, as window indices.
struct Trajectory {
  Point anchor;
  double mark = 0;
  std::vector<std::size_t> vertices;
  std::vector<std::size_t> edges;
  bool truncated = false;  // killed at the safety sphere
};

inline constexpr double kUnvisited = std::numeric_limits<double>::infinity();

struct InterlacementSample {
  Window window;
  double u = 0;
  SampleMode mode = SampleMode::exact;
  std::size_t count = 0;       // N_W: trajectories meeting the window
  std::vector<double> marks;   // one Uniform(0, u] mark per trajectory
  // Smallest mark among the trajectories visiting each vertex / traversing
  // each edge, kUnvisited if none. The sample at level u' <= u consists of
  // the trajectories with mark <= u'.
  std::vector<double> vertex_mark;
  std::vector<double> edge_mark;
  SiteField occupied;
  BondField traversed;
  double error_bound = 0;  // truncated mode: u cap(W) max_{|x - c| = R_s} P_x[H_W < inf]
  std::vector<Trajectory> traces;
};

/// Complement of the occupied set within the window.
SiteField vacant(const InterlacementSample& s);

/// The coupled sample at level v <= s.u (trajectories with mark <= v).
InterlacementSample thin(const InterlacementSample& s, double v);

/// Poisson(u cap) trajectory count.
std::size_t sample_count(double u, double capacity, Rng& rng);

/// A point drawn from the normalized equilibrium measure.
Point sample_entry(const EquilibriumProfile& profile, Rng& rng);

/// Prepared sampler for one window. Construction solves the equilibrium
/// problem for the window and, in exact mode, tabulates the return
/// probability and the harmonic measure for every point just outside the
/// window (up to the window's symmetries). Sampling is then const and may be
/// called concurrently with distinct streams.
class WindowSampler {
 public:
  WindowSampler(const GreenFunction& green, const Window& window, SamplerOptions opt = {});
  ~WindowSampler();
  WindowSampler(WindowSampler&&) noexcept;
  WindowSampler& operator=(WindowSampler&&) noexcept;

  const Window& window() const;
  const SamplerOptions& options() const;
  const EquilibriumSystem& equilibrium() const;
  double capacity() const;
  int safety_radius() const;
  /// max over the safety sphere of P_x[H_W < inf] (truncated mode only).
  double sphere_hitting_max() const;
  /// Number of tabulated re-entry distributions (exact mode).
  std::size_t reentry_table_size() const;

  InterlacementSample sample(double u, Rng& rng) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace interlace
