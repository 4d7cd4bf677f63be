// Multiscale block events: scale hierarchy, seed events, recursive bad
// events, *-connectivity of bad blocks and the path lifting check.
#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "interlace/fields.hpp"
#include "interlace/percolation.hpp"

namespace interlace {

/// 30 * 4^d.
long long l_of_d(int d);

/// Scales L_n = l0^n L0 with the separation constant of the recursion.
class ScaleHierarchy {
 public:
  /// `separation` replaces l(d) in the recursion; used for desk-scale tests.
  ScaleHierarchy(int dim, int L0, int l0, std::optional<long long> separation = std::nullopt);

  int dim() const { return dim_; }
  int L0() const { return L0_; }
  int l0() const { return l0_; }
  long long separation() const { return separation_; }
  bool separation_overridden() const { return overridden_; }
  /// l0 is a multiple of l(d) (hence >= l(d)) and the separation is l(d).
  bool asymptotic_regime() const;

  long long L(int n) const;
  /// Blocks of G_0 per side of a level-n box: l0^n.
  long long blocks_per_side(int n) const;
  /// separation * dist > L_n, for an l∞ distance in lattice units.
  bool separated(long long dist, int n) const;

 private:
  int dim_;
  int L0_;
  int l0_;
  long long separation_;
  bool overridden_;
};

/// Boolean field over a box of G_0, addressed by block coordinates b (the
/// block with lattice corner L0 * b).
struct BlockField {
  int L0 = 1;
  SiteField bad;

  const Window& blocks() const { return bad.window(); }
  bool at(const Point& b) const { return bad[blocks().index(b)]; }
};

/// Seed events on a bond configuration for the block with lattice corner x.
/// All require the box x + [0, 2 L0)^d inside the bond window.
bool eval_seed_E(const BondField& bonds, const Point& x, int L0, double m);
bool eval_seed_F(const BondField& bonds, const Point& x, int L0, double m);
/// True when the bad event holds: some edge of the box is closed.
bool eval_seed_D(const BondField& bonds, const Point& x, int L0);

/// bad = not E(interlacement) or not F(interlacement) or D(dilution), for
/// every block of `blocks` (block coordinates).
BlockField classify_blocks(const BondField& interlacement, const BondField& dilution, int L0, double m,
                           const Window& blocks);

/// The recursive bad event at level n for the level-n box whose corner block
/// is `x`: two level-(n-1) sub-boxes at separated positions are both bad.
/// Level 0 reads the field. Memoized bottom-up over the box.
bool eval_recursive(const BlockField& bad0, const ScaleHierarchy& h, const Point& x, int n);

/// Values of the recursive event at level n for every level-n box corner
/// x + l0^n c inside the field, returned as a field over c.
SiteField eval_recursive_grid(const BlockField& bad0, const ScaleHierarchy& h, const Point& x, int n);

/// *-path of bad blocks from B(x, M) to the sphere of radius N around x,
/// inside B(x, N); x a block corner in lattice units, M < N multiples of L0.
bool hstar_event(const BlockField& bad0, const Point& x, long long M, long long N);

class PathLiftError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct PathLiftReport {
  bool ok = false;
  std::string failure;                      // names the violated clause and block
  std::vector<std::size_t> component_size;  // size of C_z per block
  std::vector<std::size_t> segment_length;  // path steps between consecutive blocks
  std::vector<Point> path;                  // open nearest-neighbour path
};

/// Checks the lifting of a nearest-neighbour path of good blocks (lattice
/// corners) to an open path of the interlacement-and-dilution graph:
/// each block box x + [0, L0)^d holds exactly one component of size
/// >= (3/4) m L0^d, and consecutive ones are joined inside the union of the
/// two 2 L0-boxes. Throws PathLiftError when the blocks are not adjacent or
/// not good.
PathLiftReport path_lift(const std::vector<Point>& blocks, const BondField& interlacement, const BondField& dilution,
                         int L0, double m);

/// (l0^{2d} p + 1/4)^{2^n}, evaluated in log space.
double decoupling_bound(int l0, int d, int n, double p_seed);
double log_decoupling_bound(int l0, int d, int n, double p_seed);

}  // namespace interlace
