#include "interlace/percolation.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace interlace {

namespace {

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n), size_(n, 1) { std::iota(parent_.begin(), parent_.end(), 0); }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (size_[a] < size_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
  }

 private:
  std::vector<std::size_t> parent_;
  std::vector<std::size_t> size_;
};

// Calls f(sub_index, window_index) for every vertex of `sub` (inside `w`).
template <class F>
void for_each_sub_vertex(const Window& w, const Window& sub, F&& f) {
  const int d = w.dim();
  const std::size_t base = w.index(sub.corner());
  std::array<int, kMaxDim> rel{};
  std::size_t global = base;
  for (std::size_t v = 0; v < sub.vertex_count(); ++v) {
    f(v, global);
    int a = 0;
    while (a < d) {
      if (++rel[a] < sub.side(a)) {
        global += w.stride(a);
        break;
      }
      global -= static_cast<std::size_t>(sub.side(a) - 1) * w.stride(a);
      rel[a] = 0;
      ++a;
    }
  }
}

void require_ball(const Window& w, const Point& center, int radius) {
  if (radius < 0) throw std::invalid_argument("negative radius");
  if (!w.contains(Window::ball(center, radius))) {
    throw std::invalid_argument("window " + w.str() + " does not contain B(" + center.str() + ", " +
                                std::to_string(radius) + ")");
  }
}

bool on_sphere(const Window& ball, std::size_t v, std::array<int, kMaxDim>& rel) {
  ball.relative(v, rel);
  for (int a = 0; a < ball.dim(); ++a) {
    if (rel[a] == 0 || rel[a] == ball.side(a) - 1) return true;
  }
  return false;
}

// l∞ distance from the centre of a ball window of radius r.
int center_distance(const Window& ball, std::size_t v, std::array<int, kMaxDim>& rel) {
  ball.relative(v, rel);
  const int r = (ball.side(0) - 1) / 2;
  int m = 0;
  for (int a = 0; a < ball.dim(); ++a) m = std::max(m, std::abs(rel[a] - r));
  return m;
}

}  // namespace

Configuration Configuration::from_sites(SiteField sites) {
  Configuration c;
  c.window = sites.window();
  c.rule = Rule::site;
  c.sites = std::move(sites);
  return c;
}

Configuration Configuration::from_bonds(BondField bonds) {
  Configuration c;
  c.window = bonds.window();
  c.rule = Rule::bond;
  c.bonds = std::move(bonds);
  return c;
}

Configuration Configuration::from_sites_and_bonds(SiteField sites, BondField bonds) {
  if (!(sites.window() == bonds.window())) throw std::invalid_argument("site and bond fields on different windows");
  Configuration c;
  c.window = sites.window();
  c.rule = Rule::site_and_bond;
  c.sites = std::move(sites);
  c.bonds = std::move(bonds);
  return c;
}

bool Configuration::open(std::size_t e) const {
  if (rule == Rule::bond) return bonds[e];
  const auto [v, w] = window.edge_endpoints(e);
  const bool both = sites[v] && sites[w];
  return rule == Rule::site ? both : both && bonds[e];
}

std::vector<std::uint8_t> Configuration::active_mask() const {
  if (rule != Rule::bond) return sites.raw();
  std::vector<std::uint8_t> mask(window.vertex_count(), 0);
  for (std::size_t e = 0; e < window.edge_count(); ++e) {
    if (!bonds[e]) continue;
    const auto [v, w] = window.edge_endpoints(e);
    mask[v] = mask[w] = 1;
  }
  return mask;
}

Configuration restrict_to(const Configuration& cfg, const Window& sub) {
  const Window& w = cfg.window;
  if (!w.contains(sub)) throw std::invalid_argument("sub-box " + sub.str() + " leaves window " + w.str());
  Configuration out;
  out.window = sub;
  out.rule = cfg.rule;
  if (cfg.rule != Rule::bond) {
    out.sites = SiteField(sub);
    for_each_sub_vertex(w, sub, [&](std::size_t v, std::size_t g) { out.sites.set(v, cfg.sites[g]); });
  }
  if (cfg.rule != Rule::site) {
    out.bonds = BondField(sub);
    std::array<int, kMaxDim> rel{};
    const int d = sub.dim();
    for_each_sub_vertex(w, sub, [&](std::size_t v, std::size_t g) {
      sub.relative(v, rel);
      for (int a = 0; a < d; ++a) {
        if (rel[a] + 1 < sub.side(a)) out.bonds.set(sub.edge_index_relative(rel, a), cfg.bonds[w.edge_index(g, a)]);
      }
    });
  }
  return out;
}

std::size_t ComponentLabeling::max_size() const {
  return size.empty() ? 0 : *std::max_element(size.begin(), size.end());
}

int ComponentLabeling::max_diameter() const {
  return diameter.empty() ? -1 : *std::max_element(diameter.begin(), diameter.end());
}

ComponentLabeling components(const Configuration& cfg, Adjacency adjacency) {
  const Window& w = cfg.window;
  const int d = w.dim();
  const std::size_t n = w.vertex_count();
  const std::vector<std::uint8_t> active = cfg.active_mask();
  UnionFind uf(n);
  if (adjacency == Adjacency::nearest) {
    for (std::size_t e = 0; e < w.edge_count(); ++e) {
      if (!cfg.open(e)) continue;
      const auto [a, b] = w.edge_endpoints(e);
      uf.unite(a, b);
    }
  } else {
    if (cfg.rule != Rule::site) throw std::invalid_argument("star adjacency needs a site configuration");
    // offsets in {-1,0,1}^d that are lexicographically positive
    std::vector<std::array<int, kMaxDim>> offsets;
    std::array<int, kMaxDim> o{};
    const int total = static_cast<int>(std::pow(3, d));
    for (int code = 0; code < total; ++code) {
      int c = code;
      for (int a = 0; a < d; ++a) {
        o[a] = c % 3 - 1;
        c /= 3;
      }
      int first = 0;
      for (int a = d - 1; a >= 0; --a) {
        if (o[a] != 0) {
          first = o[a];
          break;
        }
      }
      if (first > 0) offsets.push_back(o);
    }
    std::array<int, kMaxDim> rel{};
    std::array<int, kMaxDim> nb{};
    for (std::size_t v = 0; v < n; ++v) {
      if (!active[v]) continue;
      w.relative(v, rel);
      for (const auto& off : offsets) {
        bool inside = true;
        for (int a = 0; a < d && inside; ++a) {
          nb[a] = rel[a] + off[a];
          inside = nb[a] >= 0 && nb[a] < w.side(a);
        }
        if (!inside) continue;
        const std::size_t u = w.index_relative(std::span<const int>(nb.data(), static_cast<std::size_t>(d)));
        if (active[u]) uf.unite(v, u);
      }
    }
  }

  ComponentLabeling out;
  out.label.assign(n, -1);
  std::vector<int> root_label(n, -1);
  std::vector<std::array<int, kMaxDim>> lo, hi;
  std::array<int, kMaxDim> rel{};
  for (std::size_t v = 0; v < n; ++v) {
    if (!active[v]) continue;
    ++out.active;
    const std::size_t r = uf.find(v);
    int& l = root_label[r];
    w.relative(v, rel);
    if (l < 0) {
      l = static_cast<int>(out.size.size());
      out.size.push_back(0);
      out.first.push_back(v);
      lo.push_back(rel);
      hi.push_back(rel);
    }
    out.label[v] = l;
    ++out.size[static_cast<std::size_t>(l)];
    for (int a = 0; a < d; ++a) {
      lo[static_cast<std::size_t>(l)][a] = std::min(lo[static_cast<std::size_t>(l)][a], rel[a]);
      hi[static_cast<std::size_t>(l)][a] = std::max(hi[static_cast<std::size_t>(l)][a], rel[a]);
    }
  }
  out.diameter.resize(out.size.size());
  for (std::size_t c = 0; c < out.size.size(); ++c) {
    int m = 0;
    for (int a = 0; a < d; ++a) m = std::max(m, hi[c][a] - lo[c][a]);
    out.diameter[c] = m;
  }
  return out;
}

bool crossing(const Configuration& cfg, const Point& center, int inner, int outer) {
  require_ball(cfg.window, center, outer);
  if (inner < 0 || inner > outer) throw std::invalid_argument("crossing needs 0 <= inner <= outer");
  const Window ball = Window::ball(center, outer);
  const Configuration sub = restrict_to(cfg, ball);
  const ComponentLabeling lab = components(sub);
  std::vector<std::uint8_t> from_inner(lab.count(), 0);
  std::array<int, kMaxDim> rel{};
  for (std::size_t v = 0; v < ball.vertex_count(); ++v) {
    if (lab.label[v] >= 0 && center_distance(ball, v, rel) <= inner) from_inner[static_cast<std::size_t>(lab.label[v])] = 1;
  }
  for (std::size_t v = 0; v < ball.vertex_count(); ++v) {
    if (lab.label[v] >= 0 && on_sphere(ball, v, rel) && from_inner[static_cast<std::size_t>(lab.label[v])]) return true;
  }
  return false;
}

bool crossing(const Configuration& cfg, const Point& center, int L) { return crossing(cfg, center, L, 2 * L); }

double crossing_threshold(const Window& window, const std::vector<double>& level, const Point& center, int inner,
                          int outer) {
  require_ball(window, center, outer);
  if (level.size() != window.vertex_count()) throw std::invalid_argument("level field does not match window");
  const Window ball = Window::ball(center, outer);
  const std::size_t n = ball.vertex_count();
  std::vector<double> lv(n);
  for_each_sub_vertex(window, ball, [&](std::size_t v, std::size_t g) { lv[v] = level[g]; });
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return lv[a] > lv[b]; });

  const std::size_t source = n, sink = n + 1;
  UnionFind uf(n + 2);
  std::vector<std::uint8_t> added(n, 0);
  std::array<int, kMaxDim> rel{};
  const int d = ball.dim();
  for (std::size_t v : order) {
    added[v] = 1;
    for (int a = 0; a < d; ++a) {
      for (int sign : {+1, -1}) {
        if (auto u = ball.step(v, a, sign); u && added[*u]) uf.unite(v, *u);
      }
    }
    if (center_distance(ball, v, rel) <= inner) uf.unite(v, source);
    if (on_sphere(ball, v, rel)) uf.unite(v, sink);
    if (uf.find(source) == uf.find(sink)) return lv[v];
  }
  return -std::numeric_limits<double>::infinity();
}

Configuration slab_restrict(const Configuration& cfg, int thickness) {
  const Window& w = cfg.window;
  const int d = w.dim();
  if (thickness < 0) throw std::invalid_argument("slab thickness must be nonnegative");
  for (int a = 2; a < d; ++a) {
    if (thickness > w.side(a)) throw std::invalid_argument("slab thickness exceeds the window extent");
  }
  std::vector<std::uint8_t> keep(w.vertex_count(), 1);
  std::array<int, kMaxDim> rel{};
  for (std::size_t v = 0; v < w.vertex_count(); ++v) {
    w.relative(v, rel);
    for (int a = 2; a < d; ++a) {
      if (rel[a] >= thickness) keep[v] = 0;
    }
  }
  Configuration out = cfg;
  if (cfg.rule != Rule::bond) {
    for (std::size_t v = 0; v < w.vertex_count(); ++v) {
      if (!keep[v]) out.sites.set(v, false);
    }
  } else {
    for (std::size_t e = 0; e < w.edge_count(); ++e) {
      const auto [a, b] = w.edge_endpoints(e);
      if (!keep[a] || !keep[b]) out.bonds.set(e, false);
    }
  }
  return out;
}

SiteField diameter_filter(const Configuration& cfg, int k, Adjacency adjacency) {
  if (k < 0) throw std::invalid_argument("diameter filter needs k >= 0");
  const ComponentLabeling lab = components(cfg, adjacency);
  SiteField out(cfg.window);
  for (std::size_t v = 0; v < out.size(); ++v) {
    const int l = lab.label[v];
    if (l >= 0 && lab.diameter[static_cast<std::size_t>(l)] >= k) out.set(v);
  }
  return out;
}

bool dual_blocking_circuit(const BlockGrid2D& g) {
  if (g.nx <= 0 || g.ny <= 0 || g.bad.size() != static_cast<std::size_t>(g.nx) * g.ny) {
    throw std::invalid_argument("malformed block grid");
  }
  const int cx = g.nx / 2, cy = g.ny / 2;
  if (g.is_bad(cx, cy)) return true;
  std::vector<std::uint8_t> seen(g.bad.size(), 0);
  std::deque<std::pair<int, int>> queue{{cx, cy}};
  seen[static_cast<std::size_t>(cy) * g.nx + cx] = 1;
  while (!queue.empty()) {
    const auto [x, y] = queue.front();
    queue.pop_front();
    if (x == 0 || y == 0 || x == g.nx - 1 || y == g.ny - 1) return false;
    const int dx[] = {1, -1, 0, 0};
    const int dy[] = {0, 0, 1, -1};
    for (int k = 0; k < 4; ++k) {
      const int nx = x + dx[k], ny = y + dy[k];
      const std::size_t i = static_cast<std::size_t>(ny) * g.nx + nx;
      if (seen[i] || g.is_bad(nx, ny)) continue;
      seen[i] = 1;
      queue.emplace_back(nx, ny);
    }
  }
  return true;
}

namespace {

// Labels, in the labeling of `outer_ball`, of representatives of the
// selected components of `inner_lab` (computed on `inner_ball`).
bool all_in_one_component(const Configuration& cfg, const Window& inner_ball, const ComponentLabeling& inner_lab,
                          const std::vector<std::uint8_t>& selected, const Window& outer_ball) {
  const Configuration outer = restrict_to(cfg, outer_ball);
  const ComponentLabeling outer_lab = components(outer);
  int common = -2;
  for (std::size_t c = 0; c < inner_lab.count(); ++c) {
    if (!selected[c]) continue;
    const Point p = inner_ball.point(inner_lab.first[c]);
    const int l = outer_lab.label[outer_ball.index(p)];
    if (common == -2) {
      common = l;
    } else if (l != common) {
      return false;
    }
  }
  return true;
}

}  // namespace

bool local_uniqueness_event(const Configuration& cfg, const Point& center, int n) {
  if (n < 1) throw std::invalid_argument("local uniqueness needs n >= 1");
  require_ball(cfg.window, center, 2 * n);
  const Window small = Window::ball(center, n);
  const ComponentLabeling lab = components(restrict_to(cfg, small));
  std::vector<std::uint8_t> big(lab.count(), 0);
  for (std::size_t c = 0; c < lab.count(); ++c) big[c] = 10 * lab.diameter[c] >= n;
  return all_in_one_component(cfg, small, lab, big, Window::ball(center, 2 * n));
}

bool annulus_uniqueness_event(const Configuration& cfg, const Point& z, int k) {
  if (k < 1) throw std::invalid_argument("annulus event needs k >= 1");
  require_ball(cfg.window, z, 6 * k);
  if (!crossing(cfg, z, k, 4 * k)) return false;
  const Window mid = Window::ball(z, 3 * k);
  const ComponentLabeling lab = components(restrict_to(cfg, mid));
  std::vector<std::uint8_t> meets_inner(lab.count(), 0), meets_sphere(lab.count(), 0);
  std::array<int, kMaxDim> rel{};
  for (std::size_t v = 0; v < mid.vertex_count(); ++v) {
    const int l = lab.label[v];
    if (l < 0) continue;
    if (center_distance(mid, v, rel) <= 2 * k) meets_inner[static_cast<std::size_t>(l)] = 1;
    if (on_sphere(mid, v, rel)) meets_sphere[static_cast<std::size_t>(l)] = 1;
  }
  std::vector<std::uint8_t> crossing_comp(lab.count(), 0);
  for (std::size_t c = 0; c < lab.count(); ++c) crossing_comp[c] = meets_inner[c] && meets_sphere[c];
  return all_in_one_component(cfg, mid, lab, crossing_comp, Window::ball(z, 6 * k));
}

}  // namespace interlace
