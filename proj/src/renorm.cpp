#include "interlace/renorm.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <iterator>
#include <limits>

namespace interlace {

long long l_of_d(int d) {
  require_dimension(d);
  long long v = 30;
  for (int i = 0; i < d; ++i) v *= 4;
  return v;
}

ScaleHierarchy::ScaleHierarchy(int dim, int L0, int l0, std::optional<long long> separation)
    : dim_(dim), L0_(L0), l0_(l0), separation_(separation.value_or(0)), overridden_(separation.has_value()) {
  require_dimension(dim);
  if (L0 < 1 || l0 < 1) throw std::invalid_argument("L0 and l0 must be positive");
  if (!overridden_) separation_ = l_of_d(dim);
  if (separation_ < 1) throw std::invalid_argument("separation constant must be positive");
}

bool ScaleHierarchy::asymptotic_regime() const {
  const long long l = l_of_d(dim_);
  return !overridden_ && l0_ % l == 0;
}

long long ScaleHierarchy::blocks_per_side(int n) const {
  if (n < 0) throw std::invalid_argument("negative level");
  long long b = 1;
  for (int i = 0; i < n; ++i) {
    if (b > std::numeric_limits<long long>::max() / l0_) throw std::overflow_error("scale overflows");
    b *= l0_;
  }
  return b;
}

long long ScaleHierarchy::L(int n) const {
  const long long b = blocks_per_side(n);
  if (b > std::numeric_limits<long long>::max() / L0_) throw std::overflow_error("scale overflows");
  return b * L0_;
}

bool ScaleHierarchy::separated(long long dist, int n) const {
  return static_cast<__int128>(separation_) * dist > static_cast<__int128>(L(n));
}

// ---------------------------------------------------------------------------

namespace {

Window box_at(const Point& x, int side) { return Window::cube(x, side); }

void require_box(const BondField& bonds, const Point& x, int side) {
  if (!bonds.window().contains(box_at(x, side))) {
    throw std::invalid_argument("bond field " + bonds.window().str() + " does not cover the box at " + x.str());
  }
}

Point sub_corner(const Point& x, int L0, int code) {
  Point c = x;
  for (int a = 0; a < x.dim(); ++a) {
    if (code >> a & 1) c[a] += L0;
  }
  return c;
}

double block_volume(int L0, int d) { return std::pow(static_cast<double>(L0), d); }

// Component sizes >= (3/4) m L0^d.
bool is_big(std::size_t size, double m, int L0, int d) {
  return 4.0 * static_cast<double>(size) >= 3.0 * m * block_volume(L0, d);
}

Configuration bond_config(const BondField& bonds) { return Configuration::from_bonds(bonds); }

// Labels, in the labeling of `outer`, of the big components inside `sub`.
std::vector<int> big_labels(const Configuration& cfg, const Window& sub, const Window& outer,
                            const ComponentLabeling& outer_lab, double m, int L0) {
  const ComponentLabeling lab = components(restrict_to(cfg, sub));
  std::vector<int> out;
  for (std::size_t c = 0; c < lab.count(); ++c) {
    if (!is_big(lab.size[c], m, L0, sub.dim())) continue;
    out.push_back(outer_lab.label[outer.index(sub.point(lab.first[c]))]);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace

bool eval_seed_E(const BondField& bonds, const Point& x, int L0, double m) {
  require_box(bonds, x, 2 * L0);
  const int d = x.dim();
  const Configuration cfg = bond_config(bonds);
  const Window outer = box_at(x, 2 * L0);
  const ComponentLabeling outer_lab = components(restrict_to(cfg, outer));
  std::vector<int> common;
  for (int code = 0; code < (1 << d); ++code) {
    const std::vector<int> labels = big_labels(cfg, box_at(sub_corner(x, L0, code), L0), outer, outer_lab, m, L0);
    if (labels.empty()) return false;
    if (code == 0) {
      common = labels;
    } else {
      std::vector<int> both;
      std::set_intersection(common.begin(), common.end(), labels.begin(), labels.end(), std::back_inserter(both));
      common = std::move(both);
    }
  }
  return !common.empty();
}

bool eval_seed_F(const BondField& bonds, const Point& x, int L0, double m) {
  require_box(bonds, x, 2 * L0);
  const int d = x.dim();
  const Configuration cfg = bond_config(bonds);
  for (int code = 0; code < (1 << d); ++code) {
    const Configuration sub = restrict_to(cfg, box_at(sub_corner(x, L0, code), L0));
    std::size_t touched = 0;
    for (auto b : sub.active_mask()) touched += b;
    if (4.0 * static_cast<double>(touched) > 5.0 * m * block_volume(L0, d)) return false;
  }
  return true;
}

bool eval_seed_D(const BondField& bonds, const Point& x, int L0) {
  require_box(bonds, x, 2 * L0);
  const Window box = box_at(x, 2 * L0);
  const BondField local = restrict_to(bond_config(bonds), box).bonds;
  return local.count() != local.size();
}

BlockField classify_blocks(const BondField& interlacement, const BondField& dilution, int L0, double m,
                           const Window& blocks) {
  if (!(interlacement.window() == dilution.window())) {
    throw std::invalid_argument("interlacement and dilution fields on different windows");
  }
  BlockField out;
  out.L0 = L0;
  out.bad = SiteField(blocks);
  for (std::size_t i = 0; i < blocks.vertex_count(); ++i) {
    const Point x = blocks.point(i).scaled(L0);
    const bool bad = eval_seed_D(dilution, x, L0) || !eval_seed_E(interlacement, x, L0, m) ||
                     !eval_seed_F(interlacement, x, L0, m);
    out.bad.set(i, bad);
  }
  return out;
}

// ---------------------------------------------------------------------------

SiteField eval_recursive_grid(const BlockField& bad0, const ScaleHierarchy& h, const Point& x, int n) {
  if (n < 0) throw std::invalid_argument("negative level");
  const Window& field = bad0.blocks();
  const int d = h.dim();
  if (field.dim() != d || x.dim() != d) throw std::invalid_argument("block field dimension mismatch");
  const long long span = h.blocks_per_side(n);
  std::array<int, kMaxDim> count{};
  for (int a = 0; a < d; ++a) {
    const long long room = static_cast<long long>(field.corner()[a]) + field.side(a) - x[a];
    if (x[a] < field.corner()[a] || room < span) {
      throw std::invalid_argument("block field does not cover the level-" + std::to_string(n) + " box at " + x.str());
    }
    count[a] = static_cast<int>(room / span);
  }

  // Level 0 over the covered region.
  std::vector<int> sides(d);
  for (int a = 0; a < d; ++a) sides[a] = static_cast<int>(count[a] * span);
  Window grid(Point(d), sides);
  std::vector<std::uint8_t> level(grid.vertex_count());
  std::array<int, kMaxDim> rel{};
  for (std::size_t v = 0; v < grid.vertex_count(); ++v) {
    grid.relative(v, rel);
    Point b = x;
    for (int a = 0; a < d; ++a) b[a] += rel[a];
    level[v] = bad0.at(b);
  }

  // Child offsets of a box and the separated pairs among them.
  const int l0 = h.l0();
  std::vector<int> child_sides(d, l0);
  const Window children(Point(d), child_sides);
  std::array<int, kMaxDim> ca{}, cb{};

  for (int k = 1; k <= n; ++k) {
    std::vector<int> next_sides(d);
    for (int a = 0; a < d; ++a) next_sides[a] = grid.side(a) / l0;
    Window next(Point(d), next_sides);
    std::vector<std::uint8_t> next_level(next.vertex_count(), 0);
    const long long child_scale = h.L(k - 1);
    std::vector<std::size_t> bad_children;
    for (std::size_t v = 0; v < next.vertex_count(); ++v) {
      next.relative(v, rel);
      bad_children.clear();
      for (std::size_t c = 0; c < children.vertex_count(); ++c) {
        children.relative(c, ca);
        for (int a = 0; a < d; ++a) cb[a] = rel[a] * l0 + ca[a];
        if (level[grid.index_relative(std::span<const int>(cb.data(), static_cast<std::size_t>(d)))]) {
          bad_children.push_back(c);
        }
      }
      bool hit = false;
      for (std::size_t i = 0; i < bad_children.size() && !hit; ++i) {
        children.relative(bad_children[i], ca);
        for (std::size_t j = i + 1; j < bad_children.size() && !hit; ++j) {
          children.relative(bad_children[j], cb);
          long long dist = 0;
          for (int a = 0; a < d; ++a) dist = std::max<long long>(dist, std::abs(ca[a] - cb[a]));
          hit = h.separated(dist * child_scale, k);
        }
      }
      next_level[v] = hit;
    }
    grid = next;
    level = std::move(next_level);
  }

  SiteField out(grid);
  for (std::size_t v = 0; v < grid.vertex_count(); ++v) out.set(v, level[v]);
  return out;
}

bool eval_recursive(const BlockField& bad0, const ScaleHierarchy& h, const Point& x, int n) {
  return eval_recursive_grid(bad0, h, x, n)[0];
}

bool hstar_event(const BlockField& bad0, const Point& x, long long M, long long N) {
  const int L0 = bad0.L0;
  if (M < 0 || M >= N || M % L0 != 0 || N % L0 != 0) {
    throw std::invalid_argument("H* event needs 0 <= M < N, both multiples of L0");
  }
  Point xb = x;
  for (int a = 0; a < x.dim(); ++a) {
    if (x[a] % L0 != 0) throw std::invalid_argument("H* centre must be a block corner");
    xb[a] = x[a] / L0;
  }
  const int m = static_cast<int>(M / L0), n = static_cast<int>(N / L0);
  const Window ball = Window::ball(xb, n);
  if (!bad0.blocks().contains(ball)) throw std::invalid_argument("block field does not cover B(x, N)");
  const Configuration cfg = restrict_to(Configuration::from_sites(bad0.bad), ball);
  const ComponentLabeling lab = components(cfg, Adjacency::star);
  std::vector<std::uint8_t> from_inner(lab.count(), 0);
  std::array<int, kMaxDim> rel{};
  auto dist = [&](std::size_t v) {
    ball.relative(v, rel);
    int r = 0;
    for (int a = 0; a < ball.dim(); ++a) r = std::max(r, std::abs(rel[a] - n));
    return r;
  };
  for (std::size_t v = 0; v < ball.vertex_count(); ++v) {
    if (lab.label[v] >= 0 && dist(v) <= m) from_inner[static_cast<std::size_t>(lab.label[v])] = 1;
  }
  for (std::size_t v = 0; v < ball.vertex_count(); ++v) {
    if (lab.label[v] >= 0 && dist(v) == n && from_inner[static_cast<std::size_t>(lab.label[v])]) return true;
  }
  return false;
}

// ---------------------------------------------------------------------------

PathLiftReport path_lift(const std::vector<Point>& blocks, const BondField& interlacement, const BondField& dilution,
                         int L0, double m) {
  if (blocks.empty()) throw PathLiftError("empty block path");
  if (!(interlacement.window() == dilution.window())) throw PathLiftError("fields on different windows");
  const Window& w = interlacement.window();
  const int d = w.dim();
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const Point& x = blocks[i];
    for (int a = 0; a < d; ++a) {
      if (x[a] % L0 != 0) throw PathLiftError("block " + x.str() + " is not a point of L0 Z^d");
    }
    if (i > 0 && (x - blocks[i - 1]).norm1() != L0) {
      throw PathLiftError("blocks " + blocks[i - 1].str() + " and " + x.str() + " are not neighbours in L0 Z^d");
    }
    if (!w.contains(box_at(x, 2 * L0))) throw PathLiftError("fields do not cover the box of block " + x.str());
    if (eval_seed_D(dilution, x, L0) || !eval_seed_E(interlacement, x, L0, m) || !eval_seed_F(interlacement, x, L0, m)) {
      throw PathLiftError("block " + x.str() + " is bad");
    }
  }

  BondField both(w);
  for (std::size_t e = 0; e < both.size(); ++e) both.set(e, interlacement[e] && dilution[e]);
  const Configuration cfg = Configuration::from_bonds(both);

  PathLiftReport report;
  // (a) unique big component in each block box.
  std::vector<std::vector<std::uint8_t>> member(blocks.size());
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const Window box = box_at(blocks[i], L0);
    const ComponentLabeling lab = components(restrict_to(cfg, box));
    int found = -1, how_many = 0;
    for (std::size_t c = 0; c < lab.count(); ++c) {
      if (is_big(lab.size[c], m, L0, d)) {
        ++how_many;
        found = static_cast<int>(c);
      }
    }
    if (how_many != 1) {
      report.failure = "clause (a): block " + blocks[i].str() + " has " + std::to_string(how_many) +
                       " components of size >= (3/4) m L0^d";
      return report;
    }
    report.component_size.push_back(lab.size[static_cast<std::size_t>(found)]);
    member[i].assign(w.vertex_count(), 0);
    for (std::size_t v = 0; v < box.vertex_count(); ++v) {
      if (lab.label[v] == found) member[i][w.index(box.point(v))] = 1;
    }
  }

  // (b) join consecutive components inside the union of the two 2 L0-boxes.
  std::size_t current = w.vertex_count();
  for (std::size_t v = 0; v < w.vertex_count(); ++v) {
    if (member[0][v]) {
      current = v;
      break;
    }
  }
  std::vector<std::size_t> path{current};
  for (std::size_t i = 0; i + 1 < blocks.size(); ++i) {
    const Window b1 = box_at(blocks[i], 2 * L0), b2 = box_at(blocks[i + 1], 2 * L0);
    auto allowed = [&](std::size_t v) {
      const Point p = w.point(v);
      return b1.contains(p) || b2.contains(p);
    };
    std::vector<std::size_t> parent(w.vertex_count(), std::numeric_limits<std::size_t>::max());
    std::deque<std::size_t> queue{current};
    parent[current] = current;
    std::size_t reached = w.vertex_count();
    while (!queue.empty() && reached == w.vertex_count()) {
      const std::size_t v = queue.front();
      queue.pop_front();
      if (member[i + 1][v]) {
        reached = v;
        break;
      }
      for (int a = 0; a < d; ++a) {
        for (int sign : {+1, -1}) {
          const auto u = w.step(v, a, sign);
          if (!u || parent[*u] != std::numeric_limits<std::size_t>::max() || !allowed(*u)) continue;
          if (!both[w.edge_index(sign > 0 ? v : *u, a)]) continue;
          parent[*u] = v;
          queue.push_back(*u);
        }
      }
    }
    if (reached == w.vertex_count()) {
      report.failure = "clause (b): components of blocks " + blocks[i].str() + " and " + blocks[i + 1].str() +
                       " are not joined in the union of their boxes";
      return report;
    }
    std::vector<std::size_t> segment;
    for (std::size_t v = reached; v != current; v = parent[v]) segment.push_back(v);
    std::reverse(segment.begin(), segment.end());
    report.segment_length.push_back(segment.size());
    path.insert(path.end(), segment.begin(), segment.end());
    current = reached;
  }

  for (std::size_t v : path) report.path.push_back(w.point(v));
  for (std::size_t i = 1; i < path.size(); ++i) {
    const auto e = w.edge_between(path[i - 1], path[i]);
    if (!e || !both[*e]) {
      report.failure = "extracted path uses a closed or missing edge at " + report.path[i].str();
      return report;
    }
  }
  report.ok = true;
  return report;
}

double log_decoupling_bound(int l0, int d, int n, double p_seed) {
  if (!(p_seed >= 0 && p_seed <= 1)) throw std::invalid_argument("seed probability must lie in [0, 1]");
  if (n < 0 || l0 < 1) throw std::invalid_argument("decoupling bound needs n >= 0, l0 >= 1");
  const double base = std::pow(static_cast<double>(l0), 2 * d) * p_seed + 0.25;
  return std::ldexp(1.0, n) * std::log(base);
}

double decoupling_bound(int l0, int d, int n, double p_seed) {
  const double log_bound = log_decoupling_bound(l0, d, n, p_seed);
  if (n > 10) return std::exp(log_bound);
  // repeated squaring keeps dyadic cases such as (1/4)^4 exact
  double v = std::pow(static_cast<double>(l0), 2 * d) * p_seed + 0.25;
  for (int k = 0; k < n; ++k) v *= v;
  return v;
}

}  // namespace interlace
