#include "interlace/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <unordered_map>

namespace interlace {

namespace {

using Key = std::array<int, kMaxDim>;

struct KeyHash {
  std::size_t operator()(const Key& k) const noexcept {
    std::uint64_t h = 0;
    for (int c : k) h = mix64(h ^ static_cast<std::uint32_t>(c)) + 0x9E3779B97F4A7C15ULL;
    return static_cast<std::size_t>(h);
  }
};

// Window symmetry taking a relative position to its canonical representative:
// reflect every axis towards the low corner, then sort the coordinates within
// each group of axes of equal side.
struct Symmetry {
  Key canonical{};
  std::array<int, kMaxDim> perm{};  // canonical position -> original axis
  std::array<bool, kMaxDim> flip{};
};

Symmetry canonicalize(const Window& w, std::span<const int> rel) {
  const int d = w.dim();
  Symmetry s;
  std::array<int, kMaxDim> r{};
  for (int a = 0; a < d; ++a) {
    const int mirrored = w.side(a) - 1 - rel[a];
    s.flip[a] = mirrored < rel[a];
    r[a] = std::min(rel[a], mirrored);
  }
  std::array<bool, kMaxDim> done{};
  for (int a = 0; a < d; ++a) {
    if (done[a]) continue;
    std::vector<int> group;
    for (int b = a; b < d; ++b) {
      if (!done[b] && w.side(b) == w.side(a)) {
        group.push_back(b);
        done[b] = true;
      }
    }
    std::vector<int> axes = group;
    std::stable_sort(axes.begin(), axes.end(), [&](int x, int y) { return r[x] < r[y]; });
    for (std::size_t i = 0; i < group.size(); ++i) {
      s.perm[group[i]] = axes[i];
      s.canonical[group[i]] = r[axes[i]];
    }
  }
  return s;
}

void restore(const Window& w, const Symmetry& s, std::span<const int> canonical, std::span<int> out) {
  const int d = w.dim();
  for (int p = 0; p < d; ++p) out[s.perm[p]] = canonical[p];
  for (int b = 0; b < d; ++b) {
    if (s.flip[b]) out[b] = w.side(b) - 1 - out[b];
  }
}

struct ReentryRow {
  std::vector<double> cumulative;  // over the equilibrium support
  double total = 0;                // P_x[H_W < inf]
};

std::size_t draw_cumulative(const std::vector<double>& cumulative, double total, Rng& rng) {
  const double t = uniform01(rng) * total;
  auto it = std::upper_bound(cumulative.begin(), cumulative.end(), t);
  if (it == cumulative.end()) --it;
  return static_cast<std::size_t>(it - cumulative.begin());
}

}  // namespace

struct WindowSampler::Impl {
  Window window;
  SamplerOptions opt;
  std::unique_ptr<EquilibriumSystem> system;
  std::vector<double> entry_cumulative;  // over window vertices
  std::vector<Key> support_rel;          // support points, relative coordinates
  std::unordered_map<Key, ReentryRow, KeyHash> rows;
  int safety_radius = 0;
  double sphere_max = 0;

  void build_rows() {
    const int d = window.dim();
    std::array<int, kMaxDim> rel{};
    for (std::size_t v : window.inner_boundary()) {
      for (int a = 0; a < d; ++a) {
        for (int sign : {+1, -1}) {
          if (window.step(v, a, sign)) continue;
          window.relative(v, rel);
          rel[a] += sign;
          const Symmetry s = canonicalize(window, std::span<const int>(rel.data(), static_cast<std::size_t>(d)));
          if (rows.contains(s.canonical)) continue;
          Point x = window.corner();
          for (int b = 0; b < d; ++b) x[b] += s.canonical[b];
          const std::vector<double> h = system->harmonic_measure(x);
          ReentryRow row;
          row.cumulative.resize(h.size());
          std::partial_sum(h.begin(), h.end(), row.cumulative.begin());
          row.total = std::min(1.0, row.cumulative.back());
          rows.emplace(s.canonical, std::move(row));
        }
      }
    }
  }

  void build_sphere_bound() {
    const int d = window.dim();
    const Point c = window.center();
    const int R = safety_radius;
    std::unordered_map<Key, bool, KeyHash> seen;
    std::array<int, kMaxDim> off{};
    for (int a = 0; a < d; ++a) off[a] = -R;
    // Enumerate the l∞ sphere of radius R around c.
    while (true) {
      bool on_sphere = false;
      for (int a = 0; a < d; ++a) on_sphere = on_sphere || std::abs(off[a]) == R;
      if (on_sphere) {
        std::array<int, kMaxDim> rel{};
        for (int a = 0; a < d; ++a) rel[a] = c[a] + off[a] - window.corner()[a];
        const Symmetry s = canonicalize(window, std::span<const int>(rel.data(), static_cast<std::size_t>(d)));
        if (seen.emplace(s.canonical, true).second) {
          Point x = window.corner();
          for (int b = 0; b < d; ++b) x[b] += s.canonical[b];
          sphere_max = std::max(sphere_max, system->hitting_probability(x));
        }
      }
      int a = 0;
      while (a < d && off[a] == R) off[a++] = -R;
      if (a == d) break;
      ++off[a];
    }
  }

  void walk_exact(std::size_t start, Trajectory& t, InterlacementSample& out, Rng& rng) const {
    const int d = window.dim();
    std::array<int, kMaxDim> rel{};
    std::array<int, kMaxDim> back{};
    std::size_t v = start;
    while (true) {
      visit(v, t, out);
      const auto k = static_cast<int>(uniform_index(rng, 2 * static_cast<std::uint64_t>(d)));
      const int axis = k / 2;
      const int sign = (k % 2 == 0) ? 1 : -1;
      if (auto w = window.step(v, axis, sign)) {
        traverse(window.edge_index(sign > 0 ? v : *w, axis), t, out);
        v = *w;
        continue;
      }
      window.relative(v, rel);
      rel[axis] += sign;
      const Symmetry s = canonicalize(window, std::span<const int>(rel.data(), static_cast<std::size_t>(d)));
      const ReentryRow& row = rows.at(s.canonical);
      if (!bernoulli(rng, row.total)) return;
      const std::size_t z = draw_cumulative(row.cumulative, row.total, rng);
      restore(window, s, std::span<const int>(support_rel[z].data(), static_cast<std::size_t>(d)),
              std::span<int>(back.data(), static_cast<std::size_t>(d)));
      v = window.index_relative(std::span<const int>(back.data(), static_cast<std::size_t>(d)));
    }
  }

  void walk_truncated(std::size_t start, Trajectory& t, InterlacementSample& out, Rng& rng) const {
    const Point c = window.center();
    Point x = window.point(start);
    std::size_t v = start;
    bool inside = true;
    while (true) {
      if (inside) visit(v, t, out);
      const Point y = srw_step(x, rng);
      if ((y - c).norm_inf() > safety_radius) {
        t.truncated = true;
        return;
      }
      const bool y_inside = window.contains(y);
      if (y_inside) {
        const std::size_t w = window.index(y);
        if (inside) {
          const auto e = window.edge_between(v, w);
          traverse(*e, t, out);
        }
        v = w;
      }
      inside = y_inside;
      x = y;
    }
  }

  void visit(std::size_t v, Trajectory& t, InterlacementSample& out) const {
    out.vertex_mark[v] = std::min(out.vertex_mark[v], t.mark);
    if (opt.keep_traces) t.vertices.push_back(v);
  }
  void traverse(std::size_t e, Trajectory& t, InterlacementSample& out) const {
    out.edge_mark[e] = std::min(out.edge_mark[e], t.mark);
    if (opt.keep_traces) t.edges.push_back(e);
  }
};

WindowSampler::WindowSampler(const GreenFunction& green, const Window& window, SamplerOptions opt)
    : impl_(std::make_unique<Impl>()) {
  auto& m = *impl_;
  if (window.dim() != green.dim()) throw std::invalid_argument("window dimension differs from Green function");
  m.window = window;
  m.opt = opt;
  std::vector<Point> pts;
  pts.reserve(window.vertex_count());
  for (std::size_t v = 0; v < window.vertex_count(); ++v) pts.push_back(window.point(v));
  m.system = std::make_unique<EquilibriumSystem>(green, pts, opt.potential);

  const auto& prof = m.system->profile();
  m.entry_cumulative.resize(prof.normalized.size());
  std::partial_sum(prof.normalized.begin(), prof.normalized.end(), m.entry_cumulative.begin());

  const int d = window.dim();
  for (std::size_t i : m.system->support()) {
    Key k{};
    window.relative(i, std::span<int>(k.data(), static_cast<std::size_t>(d)));
    m.support_rel.push_back(k);
  }

  if (opt.mode == SampleMode::exact) {
    m.build_rows();
  } else {
    m.safety_radius = opt.safety_radius > 0 ? opt.safety_radius : 4 * window.linf_radius();
    if (m.safety_radius < window.linf_radius()) {
      throw std::invalid_argument("safety radius smaller than the window radius");
    }
    m.build_sphere_bound();
  }
}

WindowSampler::~WindowSampler() = default;
WindowSampler::WindowSampler(WindowSampler&&) noexcept = default;
WindowSampler& WindowSampler::operator=(WindowSampler&&) noexcept = default;

const Window& WindowSampler::window() const { return impl_->window; }
const SamplerOptions& WindowSampler::options() const { return impl_->opt; }
const EquilibriumSystem& WindowSampler::equilibrium() const { return *impl_->system; }
double WindowSampler::capacity() const { return impl_->system->capacity(); }
int WindowSampler::safety_radius() const { return impl_->safety_radius; }
double WindowSampler::sphere_hitting_max() const { return impl_->sphere_max; }
std::size_t WindowSampler::reentry_table_size() const { return impl_->rows.size(); }

InterlacementSample WindowSampler::sample(double u, Rng& rng) const {
  if (!(u > 0) || !std::isfinite(u)) throw std::invalid_argument("level u must be positive and finite");
  const auto& m = *impl_;
  InterlacementSample s;
  s.window = m.window;
  s.u = u;
  s.mode = m.opt.mode;
  s.vertex_mark.assign(m.window.vertex_count(), kUnvisited);
  s.edge_mark.assign(m.window.edge_count(), kUnvisited);

  s.count = sample_count(u, capacity(), rng);
  s.marks.reserve(s.count);
  for (std::size_t i = 0; i < s.count; ++i) {
    Trajectory t;
    t.mark = u * uniform_open01(rng);
    const std::size_t start = draw_cumulative(m.entry_cumulative, m.entry_cumulative.back(), rng);
    t.anchor = m.window.point(start);
    if (m.opt.mode == SampleMode::exact) {
      m.walk_exact(start, t, s, rng);
    } else {
      m.walk_truncated(start, t, s, rng);
    }
    s.marks.push_back(t.mark);
    if (m.opt.keep_traces) s.traces.push_back(std::move(t));
  }

  s.occupied = SiteField(m.window);
  for (std::size_t v = 0; v < s.vertex_mark.size(); ++v) s.occupied.set(v, s.vertex_mark[v] <= u);
  s.traversed = BondField(m.window);
  for (std::size_t e = 0; e < s.edge_mark.size(); ++e) s.traversed.set(e, s.edge_mark[e] <= u);
  if (m.opt.mode == SampleMode::truncated) s.error_bound = u * capacity() * m.sphere_max;
  return s;
}

SiteField vacant(const InterlacementSample& s) { return s.occupied.complement(); }

InterlacementSample thin(const InterlacementSample& s, double v) {
  if (!(v > 0) || v > s.u) throw std::invalid_argument("thinning level must lie in (0, u]");
  InterlacementSample t;
  t.window = s.window;
  t.u = v;
  t.mode = s.mode;
  for (double m : s.marks) {
    if (m <= v) t.marks.push_back(m);
  }
  t.count = t.marks.size();
  t.vertex_mark = s.vertex_mark;
  t.edge_mark = s.edge_mark;
  for (double& m : t.vertex_mark) {
    if (m > v) m = kUnvisited;
  }
  for (double& m : t.edge_mark) {
    if (m > v) m = kUnvisited;
  }
  t.occupied = SiteField(s.window);
  for (std::size_t i = 0; i < t.vertex_mark.size(); ++i) t.occupied.set(i, t.vertex_mark[i] <= v);
  t.traversed = BondField(s.window);
  for (std::size_t i = 0; i < t.edge_mark.size(); ++i) t.traversed.set(i, t.edge_mark[i] <= v);
  for (const Trajectory& tr : s.traces) {
    if (tr.mark <= v) t.traces.push_back(tr);
  }
  if (s.u > 0) t.error_bound = s.error_bound * v / s.u;
  return t;
}

std::size_t sample_count(double u, double capacity, Rng& rng) {
  if (!(u > 0)) throw std::invalid_argument("level u must be positive");
  const double mean = u * capacity;
  if (!(mean > 0)) return 0;
  std::poisson_distribution<std::size_t> poisson(mean);
  return poisson(rng);
}

Point sample_entry(const EquilibriumProfile& profile, Rng& rng) {
  if (!(profile.capacity > 0)) throw std::invalid_argument("entry law needs positive capacity");
  std::vector<double> cumulative(profile.normalized.size());
  std::partial_sum(profile.normalized.begin(), profile.normalized.end(), cumulative.begin());
  return profile.points[draw_cumulative(cumulative, cumulative.back(), rng)];
}

}  // namespace interlace
