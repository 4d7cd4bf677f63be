// Shared helpers for the unit and acceptance tests: small random
// generators and slow reference implementations.
#pragma once

#include <Eigen/Dense>
#include <boost/math/special_functions/gamma.hpp>
#include <algorithm>
#include <cmath>
#include <functional>
#include <queue>
#include <vector>

#include "interlace/fields.hpp"
#include "interlace/lattice.hpp"
#include "interlace/resistance.hpp"
#include "interlace/rng.hpp"

namespace testing_support {

using namespace interlace;

inline int rand_int(Rng& rng, int lo, int hi) {
  return lo + static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(hi - lo + 1)));
}

inline Point rand_point(Rng& rng, int dim, int lo, int hi) {
  Point p(dim);
  for (int a = 0; a < dim; ++a) p[a] = rand_int(rng, lo, hi);
  return p;
}

inline Window rand_window(Rng& rng, int dim, int max_side) {
  std::vector<int> sides(dim);
  for (int& s : sides) s = rand_int(rng, 1, max_side);
  return Window(rand_point(rng, dim, -5, 5), sides);
}

inline SiteField rand_sites(const Window& w, double p, Rng& rng) {
  SiteField f(w);
  for (std::size_t v = 0; v < w.vertex_count(); ++v) f.set(v, bernoulli(rng, p));
  return f;
}

inline BondField rand_bonds(const Window& w, double p, Rng& rng) {
  BondField f(w);
  for (std::size_t e = 0; e < w.edge_count(); ++e) f.set(e, bernoulli(rng, p));
  return f;
}

// Closed-walk counts of the cubic lattice (OEIS A002896) turned into return
// probabilities p_n = P[X_{2n} = 0] through the three-term recurrence
//   n^3 a(n) = 2(2n-1)(10n^2-10n+3) a(n-1) - 36(n-1)(2n-1)(2n-3) a(n-2),
// summed to `terms` and completed with the local limit tail
// sum_{n>N} 2 (3/(4 pi n))^{3/2} ~ 4 (3/(4 pi))^{3/2} / sqrt(N + 1/2).
inline double green_origin_by_return_series(long terms) {
  double p_prev = 1.0;        // p_0
  double p = 6.0 / 36.0;      // p_1
  double sum = p_prev + p;
  for (long n = 2; n <= terms; ++n) {
    const double nn = static_cast<double>(n);
    const double next = (2 * (2 * nn - 1) * (10 * nn * nn - 10 * nn + 3) * p / 36.0 -
                         36 * (nn - 1) * (2 * nn - 1) * (2 * nn - 3) * p_prev / (36.0 * 36.0)) /
                        (nn * nn * nn);
    p_prev = p;
    p = next;
    sum += p;
  }
  const double c = std::pow(3.0 / (4.0 * M_PI), 1.5);
  return sum + 4.0 * c / std::sqrt(static_cast<double>(terms) + 0.5);
}

// Dense Kirchhoff solve: Laplacian restricted to the non-sink vertices of the
// source's component, unit potential at the source.
inline double kirchhoff_resistance(const ResistorNetwork& net) {
  const std::size_t n = net.vertex_count;
  std::vector<char> sink(n, 0);
  for (auto s : net.sinks) sink[s] = 1;
  if (sink[net.source]) return 0.0;
  std::vector<std::vector<std::pair<std::size_t, double>>> adj(n);
  for (std::size_t i = 0; i < net.edges.size(); ++i) {
    const auto [a, b] = net.edges[i];
    if (a == b) continue;
    adj[a].push_back({b, 1.0 / net.resistance[i]});
    adj[b].push_back({a, 1.0 / net.resistance[i]});
  }
  std::vector<char> seen(n, 0);
  std::vector<std::size_t> comp;
  std::queue<std::size_t> q;
  q.push(net.source);
  seen[net.source] = 1;
  bool reaches_sink = false;
  while (!q.empty()) {
    const auto v = q.front();
    q.pop();
    comp.push_back(v);
    if (sink[v]) {
      reaches_sink = true;
      continue;  // potential is pinned there
    }
    for (auto [w, c] : adj[v]) {
      if (!seen[w]) {
        seen[w] = 1;
        q.push(w);
      }
    }
  }
  if (!reaches_sink) return std::numeric_limits<double>::infinity();
  // unknowns: interior vertices other than the source
  std::vector<long> id(n, -1);
  long m = 0;
  for (auto v : comp) {
    if (!sink[v] && v != net.source) id[v] = m++;
  }
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(m, m);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
  for (auto v : comp) {
    if (id[v] < 0) continue;
    for (auto [w, c] : adj[v]) {
      A(id[v], id[v]) += c;
      if (id[w] >= 0) {
        A(id[v], id[w]) -= c;
      } else if (w == net.source) {
        rhs(id[v]) += c;
      }
    }
  }
  Eigen::VectorXd phi = m > 0 ? Eigen::VectorXd(A.fullPivLu().solve(rhs)) : Eigen::VectorXd();
  double current = 0;
  for (auto [w, c] : adj[net.source]) current += c * (1.0 - (id[w] >= 0 ? phi(id[w]) : (w == net.source ? 1.0 : 0.0)));
  return 1.0 / current;
}

// Random connected-ish network on `n` vertices: a random spanning path plus
// extra random edges, resistances in [0.1, 10].
inline ResistorNetwork rand_network(Rng& rng, std::size_t n, std::size_t extra) {
  ResistorNetwork net;
  net.vertex_count = n;
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[uniform_index(rng, i)]);
  for (std::size_t i = 1; i < n; ++i) net.edges.push_back({order[i - 1], order[i]});
  for (std::size_t k = 0; k < extra; ++k) {
    const auto a = uniform_index(rng, n), b = uniform_index(rng, n);
    if (a != b) net.edges.push_back({a, b});
  }
  for (std::size_t i = 0; i < net.edges.size(); ++i) net.resistance.push_back(0.1 + 9.9 * uniform01(rng));
  net.source = order[0];
  net.sinks = {order[n - 1]};
  if (n > 3 && bernoulli(rng, 0.5)) net.sinks.push_back(order[n - 2]);
  return net;
}

// Recursive bad event straight from the definition: the level-n box with
// corner block x is bad when two of its level-(n-1) sub-boxes c1, c2 with
// separation * |c1 - c2|_inf * L_{n-1} > L_n are both bad. No memoization,
// no shared code with the library.
inline bool brute_recursive(const std::function<bool(const Point&)>& bad0, int dim, long long L0, long long l0,
                            long long separation, const Point& x, int n) {
  if (n == 0) return bad0(x);
  long long blocks_below = 1;  // blocks per side of a level-(n-1) box
  for (int k = 0; k < n - 1; ++k) blocks_below *= l0;
  const long long Lprev = blocks_below * L0;
  const long long Ln = Lprev * l0;
  std::vector<Point> subs;
  std::vector<int> idx(dim, 0);
  while (true) {
    Point c = x;
    for (int a = 0; a < dim; ++a) c[a] += static_cast<int>(idx[a] * blocks_below);
    subs.push_back(c);
    int a = 0;
    while (a < dim && ++idx[a] == l0) idx[a++] = 0;
    if (a == dim) break;
  }
  std::vector<int> value(subs.size(), -1);
  auto get = [&](std::size_t i) {
    if (value[i] < 0) value[i] = brute_recursive(bad0, dim, L0, l0, separation, subs[i], n - 1) ? 1 : 0;
    return value[i] == 1;
  };
  for (std::size_t i = 0; i < subs.size(); ++i) {
    for (std::size_t j = i + 1; j < subs.size(); ++j) {
      const long long d = (subs[i] - subs[j]).norm_inf() / blocks_below;
      if (separation * d * Lprev > Ln && get(i) && get(j)) return true;
    }
  }
  return false;
}

// BFS connectivity on a site configuration between two vertex sets,
// nearest-neighbour moves inside the window.
inline bool bfs_connects(const Window& w, const std::vector<std::uint8_t>& open,
                         const std::function<bool(const Point&)>& start,
                         const std::function<bool(const Point&)>& goal,
                         const std::function<bool(const Point&)>& allowed) {
  std::vector<char> seen(w.vertex_count(), 0);
  std::queue<std::size_t> q;
  for (std::size_t v = 0; v < w.vertex_count(); ++v) {
    const Point p = w.point(v);
    if (open[v] && allowed(p) && start(p)) {
      seen[v] = 1;
      q.push(v);
    }
  }
  while (!q.empty()) {
    const auto v = q.front();
    q.pop();
    if (goal(w.point(v))) return true;
    for (int a = 0; a < w.dim(); ++a) {
      for (int s : {-1, 1}) {
        const auto nb = w.step(v, a, s);
        if (nb && !seen[*nb] && open[*nb] && allowed(w.point(*nb))) {
          seen[*nb] = 1;
          q.push(*nb);
        }
      }
    }
  }
  return false;
}

// Upper-tail chi-square probability through the regularized gamma function.
inline double chi2_sf(double x, double dof) { return boost::math::gamma_q(dof / 2, x / 2); }

}  // namespace testing_support
