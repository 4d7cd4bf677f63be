// Connectivity analytics over site / bond configurations in a window.
#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "interlace/fields.hpp"

namespace interlace {

enum class Rule { site, bond, site_and_bond };
enum class Adjacency { nearest, star };

/// A configuration on a window.
///  - site: active vertices are the set sites; an edge is open iff both
///    endpoints are active.
///  - bond: open edges are the set bonds; active vertices are the endpoints
///    of open edges.
///  - site_and_bond: active vertices are the set sites; an edge is open iff
///    its bond is set and both endpoints are active.
struct Configuration {
  Window window;
  Rule rule = Rule::site;
  SiteField sites;
  BondField bonds;

  static Configuration from_sites(SiteField sites);
  static Configuration from_bonds(BondField bonds);
  static Configuration from_sites_and_bonds(SiteField sites, BondField bonds);

  bool open(std::size_t e) const;
  std::vector<std::uint8_t> active_mask() const;
};

/// The configuration seen inside a sub-box of the window (edges leaving the
/// sub-box are dropped).
Configuration restrict_to(const Configuration& cfg, const Window& sub);

struct ComponentLabeling {
  std::vector<int> label;          // per vertex, -1 when inactive
  std::vector<std::size_t> size;   // per component
  std::vector<int> diameter;       // per component, l∞ extent of the bounding box
  std::vector<std::size_t> first;  // smallest vertex of each component
  std::size_t active = 0;

  std::size_t count() const { return size.size(); }
  std::size_t max_size() const;
  int max_diameter() const;
};

/// Union-find labeling; components are numbered by their smallest vertex.
/// Star adjacency (l∞-distance 1) is only defined for the site rule.
ComponentLabeling components(const Configuration& cfg, Adjacency adjacency = Adjacency::nearest);

/// Whether an open path joins B(center, inner) to the sphere of radius
/// `outer` around center, inside B(center, outer). Throws when the window
/// does not contain B(center, outer).
bool crossing(const Configuration& cfg, const Point& center, int inner, int outer);
/// The annulus crossing B(center, L) -> sphere(center, 2L).
bool crossing(const Configuration& cfg, const Point& center, int L);

/// Largest t such that B(center, inner) is joined to the sphere of radius
/// `outer` through vertices with level > t (site rule, nearest neighbours,
/// inside B(center, outer)). With level[v] the value above which v stops
/// being active, the crossing holds at parameter s exactly when s < result.
/// Returns -inf when no such path exists at any level.
double crossing_threshold(const Window& window, const std::vector<double>& level, const Point& center, int inner,
                          int outer);

/// Closes every vertex outside Z^2 x [0, R)^{d-2}, coordinates taken
/// relative to the window corner.
Configuration slab_restrict(const Configuration& cfg, int thickness);

/// Active vertices whose component has l∞-diameter >= k.
SiteField diameter_filter(const Configuration& cfg, int k, Adjacency adjacency = Adjacency::nearest);

/// 2D grid of cells, row-major with x fastest; true = bad.
struct BlockGrid2D {
  int nx = 0;
  int ny = 0;
  std::vector<std::uint8_t> bad;
  bool is_bad(int x, int y) const { return bad[static_cast<std::size_t>(y) * nx + x] != 0; }
};

/// True iff no nearest-neighbour path of good cells leads from the centre
/// cell (nx/2, ny/2) to the grid boundary, i.e. a *-circuit of bad cells
/// separates them.
bool dual_blocking_circuit(const BlockGrid2D& grid);

/// Every component of the configuration in B(center, n) with diameter
/// >= n/10 lies in a single component of the configuration in B(center, 2n).
bool local_uniqueness_event(const Configuration& cfg, const Point& center, int n);

/// (a) B(z, k) is joined to the sphere of radius 4k, and (b) every component
/// of B(z, 3k) meeting both B(z, 2k) and the sphere of radius 3k lies in one
/// component of B(z, 6k).
bool annulus_uniqueness_event(const Configuration& cfg, const Point& z, int k);

}  // namespace interlace
