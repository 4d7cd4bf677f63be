#include "interlace/resistance.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <exception>
#include <mutex>
#include <thread>

#include "interlace/sampler.hpp"

namespace interlace {

ResistanceLaw ResistanceLaw::constant(double c) {
  ResistanceLaw l;
  l.kind = Kind::constant;
  l.a = l.b = c;
  l.validate();
  return l;
}

ResistanceLaw ResistanceLaw::uniform(double lo, double hi) {
  ResistanceLaw l;
  l.kind = Kind::uniform;
  l.a = lo;
  l.b = hi;
  l.validate();
  return l;
}

ResistanceLaw ResistanceLaw::exponential_truncated(double rate, double floor) {
  ResistanceLaw l;
  l.kind = Kind::exponential_truncated;
  l.a = rate;
  l.b = floor;
  l.validate();
  return l;
}

ResistanceLaw ResistanceLaw::parse(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ':');) parts.push_back(item);
  auto num = [&](std::size_t i) {
    if (i >= parts.size()) throw std::invalid_argument("resistance law '" + text + "' is missing a parameter");
    std::size_t used = 0;
    const double v = std::stod(parts[i], &used);
    if (used != parts[i].size()) throw std::invalid_argument("bad number in resistance law '" + text + "'");
    return v;
  };
  if (parts.empty()) throw std::invalid_argument("empty resistance law");
  if (parts[0] == "constant" && parts.size() == 2) return constant(num(1));
  if (parts[0] == "uniform" && parts.size() == 3) return uniform(num(1), num(2));
  if (parts[0] == "exponential" && parts.size() == 3) return exponential_truncated(num(1), num(2));
  throw std::invalid_argument("unknown resistance law '" + text + "'");
}

void ResistanceLaw::validate() const {
  switch (kind) {
    case Kind::constant:
      if (!(a > 0 && std::isfinite(a))) throw std::invalid_argument("constant resistance must be positive");
      break;
    case Kind::uniform:
      if (!(a > 0 && b >= a && std::isfinite(b))) throw std::invalid_argument("uniform law needs 0 < a <= b");
      break;
    case Kind::exponential_truncated:
      if (!(a > 0 && b > 0 && std::isfinite(a) && std::isfinite(b))) {
        throw std::invalid_argument("exponential law needs a positive rate and a positive floor");
      }
      break;
  }
}

double ResistanceLaw::draw(Rng& rng) const {
  switch (kind) {
    case Kind::constant:
      return a;
    case Kind::uniform:
      return a + (b - a) * uniform01(rng);
    case Kind::exponential_truncated:
      return std::max(b, -std::log(uniform_open01(rng)) / a);
  }
  return a;
}

std::string ResistanceLaw::str() const {
  std::ostringstream os;
  os.precision(17);
  switch (kind) {
    case Kind::constant:
      os << "constant:" << a;
      break;
    case Kind::uniform:
      os << "uniform:" << a << ':' << b;
      break;
    case Kind::exponential_truncated:
      os << "exponential:" << a << ':' << b;
      break;
  }
  return os.str();
}

std::vector<double> assign_resistances(std::size_t edge_count, const ResistanceLaw& law, Rng& rng) {
  law.validate();
  std::vector<double> r(edge_count);
  for (double& x : r) x = law.draw(rng);
  return r;
}

// ---------------------------------------------------------------------------

double effective_resistance(const ResistorNetwork& net, SolverOptions opt) {
  const std::size_t n = net.vertex_count;
  if (net.source >= n) throw std::invalid_argument("source outside the network");
  if (net.resistance.size() != net.edges.size()) throw std::invalid_argument("one resistance per edge required");
  std::vector<std::uint8_t> sink(n, 0);
  for (std::size_t s : net.sinks) {
    if (s >= n) throw std::invalid_argument("sink outside the network");
    sink[s] = 1;
  }
  if (sink[net.source]) return 0.0;

  // adjacency with conductances
  std::vector<std::size_t> offset(n + 1, 0);
  for (std::size_t k = 0; k < net.edges.size(); ++k) {
    if (!(net.resistance[k] > 0)) throw std::invalid_argument("resistances must be positive");
    const auto [a, b] = net.edges[k];
    if (a >= n || b >= n) throw std::invalid_argument("edge endpoint outside the network");
    ++offset[a + 1];
    ++offset[b + 1];
  }
  for (std::size_t v = 0; v < n; ++v) offset[v + 1] += offset[v];
  std::vector<std::size_t> nbr(offset[n]);
  std::vector<double> cond(offset[n]);
  {
    std::vector<std::size_t> fill(offset.begin(), offset.end() - 1);
    for (std::size_t k = 0; k < net.edges.size(); ++k) {
      const auto [a, b] = net.edges[k];
      const double c = 1.0 / net.resistance[k];
      nbr[fill[a]] = b;
      cond[fill[a]++] = c;
      nbr[fill[b]] = a;
      cond[fill[b]++] = c;
    }
  }

  // The source's component; unknowns are its vertices other than the
  // source and the sinks.
  std::vector<std::uint8_t> seen(n, 0);
  std::vector<std::size_t> stack{net.source}, comp;
  seen[net.source] = 1;
  bool reaches_sink = false;
  while (!stack.empty()) {
    const std::size_t v = stack.back();
    stack.pop_back();
    comp.push_back(v);
    if (sink[v]) {
      reaches_sink = true;
      continue;  // potential fixed; do not continue through sinks
    }
    for (std::size_t k = offset[v]; k < offset[v + 1]; ++k) {
      if (!seen[nbr[k]]) {
        seen[nbr[k]] = 1;
        stack.push_back(nbr[k]);
      }
    }
  }
  if (!reaches_sink) return kInfiniteResistance;
  std::sort(comp.begin(), comp.end());

  std::vector<long> unknown(n, -1);
  std::vector<std::size_t> vars;
  for (std::size_t v : comp) {
    if (v != net.source && !sink[v]) {
      unknown[v] = static_cast<long>(vars.size());
      vars.push_back(v);
    }
  }
  const std::size_t m = vars.size();
  std::vector<double> phi(m, 0.0);
  if (m > 0) {
    std::vector<double> diag(m, 0.0), b(m, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
      const std::size_t v = vars[i];
      for (std::size_t k = offset[v]; k < offset[v + 1]; ++k) {
        diag[i] += cond[k];
        if (nbr[k] == net.source) b[i] += cond[k];
      }
    }
    auto apply = [&](const std::vector<double>& x, std::vector<double>& y) {
      for (std::size_t i = 0; i < m; ++i) {
        const std::size_t v = vars[i];
        double s = diag[i] * x[i];
        for (std::size_t k = offset[v]; k < offset[v + 1]; ++k) {
          const long j = unknown[nbr[k]];
          if (j >= 0) s -= cond[k] * x[static_cast<std::size_t>(j)];
        }
        y[i] = s;
      }
    };
    auto dot = [](const std::vector<double>& x, const std::vector<double>& y) {
      double s = 0;
      for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
      return s;
    };
    const double bnorm = std::sqrt(dot(b, b));
    if (bnorm > 0) {
      std::vector<double> r = b, z(m), p(m), q(m);
      for (std::size_t i = 0; i < m; ++i) z[i] = r[i] / diag[i];
      p = z;
      double rz = dot(r, z);
      const std::size_t cap = opt.max_iterations ? opt.max_iterations : 10 * m + 100;
      std::size_t it = 0;
      while (std::sqrt(dot(r, r)) > opt.tolerance * bnorm) {
        if (++it > cap) throw SolverError("conjugate gradients did not converge in " + std::to_string(cap) + " iterations");
        apply(p, q);
        const double alpha = rz / dot(p, q);
        for (std::size_t i = 0; i < m; ++i) {
          phi[i] += alpha * p[i];
          r[i] -= alpha * q[i];
        }
        for (std::size_t i = 0; i < m; ++i) z[i] = r[i] / diag[i];
        const double rz_new = dot(r, z);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t i = 0; i < m; ++i) p[i] = z[i] + beta * p[i];
      }
    }
  }

  double current = 0;
  for (std::size_t k = offset[net.source]; k < offset[net.source + 1]; ++k) {
    const std::size_t y = nbr[k];
    const double py = sink[y] ? 0.0 : (y == net.source ? 1.0 : phi[static_cast<std::size_t>(unknown[y])]);
    current += cond[k] * (1.0 - py);
  }
  if (!(current > 0)) return kInfiniteResistance;
  return 1.0 / current;
}

ResistorNetwork ball_network(const Configuration& cfg, const std::vector<double>& edge_resistance, const Point& source,
                             int N) {
  const Window& w = cfg.window;
  if (edge_resistance.size() != w.edge_count()) throw std::invalid_argument("one resistance per window edge required");
  if (!w.contains(source)) throw std::invalid_argument("source outside the window");
  if (N < 0) throw std::invalid_argument("negative radius");
  std::vector<int> sides(w.dim());
  Point corner = source;
  for (int a = 0; a < w.dim(); ++a) {
    const int lo = std::max(w.corner()[a], source[a] - N);
    const int hi = std::min(w.corner()[a] + w.side(a) - 1, source[a] + N);
    corner[a] = lo;
    sides[a] = hi - lo + 1;
  }
  const Window box(corner, sides);
  ResistorNetwork net;
  net.vertex_count = box.vertex_count();
  net.source = box.index(source);
  for (std::size_t v = 0; v < box.vertex_count(); ++v) {
    const Point p = box.point(v);
    if ((p - source).norm_inf() == N) net.sinks.push_back(v);
    const std::size_t g = w.index(p);
    for (int a = 0; a < w.dim(); ++a) {
      const auto nb = box.step(v, a, +1);
      if (!nb) continue;
      const std::size_t e = w.edge_index(g, a);
      if (!cfg.open(e)) continue;
      net.edges.emplace_back(v, *nb);
      net.resistance.push_back(edge_resistance[e]);
    }
  }
  return net;
}

std::vector<double> resistance_profile(const Configuration& cfg, const std::vector<double>& edge_resistance,
                                       const Point& source, std::span<const int> Ns, SolverOptions opt) {
  std::vector<double> out;
  for (int N : Ns) out.push_back(effective_resistance(ball_network(cfg, edge_resistance, source, N), opt));
  return out;
}

namespace {

double quantile(std::vector<double> v, double q) {
  if (v.empty()) return std::nan("");
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  const double f = pos - static_cast<double>(lo);
  if (std::isinf(v[lo]) || std::isinf(v[hi])) return f == 0 ? v[lo] : v[hi];
  return v[lo] + f * (v[hi] - v[lo]);
}

TransienceReplica transience_replica(const WindowSampler& sampler, double u, std::span<const int> Ns,
                                     const ResistanceLaw& law, std::uint64_t seed, std::size_t r) {
  Rng rng = make_stream(seed, r, "resistance");
  const InterlacementSample s = sampler.sample(u, rng);
  const Configuration cfg = Configuration::from_bonds(s.traversed);
  const std::vector<double> res = assign_resistances(s.window.edge_count(), law, rng);
  const ComponentLabeling lab = components(cfg);
  TransienceReplica rep;
  rep.source = s.window.center();
  if (lab.count() == 0) {
    rep.resistance.assign(Ns.size(), kInfiniteResistance);
    return rep;
  }
  std::size_t best = 0;
  for (std::size_t c = 1; c < lab.count(); ++c) {
    if (lab.size[c] > lab.size[best]) best = c;
  }
  rep.cluster_size = lab.size[best];
  const Point c = s.window.center();
  long long best_dist = -1;
  for (std::size_t v = 0; v < s.window.vertex_count(); ++v) {
    if (lab.label[v] != static_cast<int>(best)) continue;
    const long long dist = (s.window.point(v) - c).norm_inf();
    if (best_dist < 0 || dist < best_dist) {
      best_dist = dist;
      rep.source = s.window.point(v);
    }
  }
  rep.resistance = resistance_profile(cfg, res, rep.source, Ns);
  return rep;
}

}  // namespace

TransienceSummary transience_profile(const WindowSampler& sampler, double u, std::span<const int> Ns,
                                     const ResistanceLaw& law, std::size_t replicas, std::uint64_t seed,
                                     int threads) {
  law.validate();
  if (replicas == 0) throw std::invalid_argument("replicas must be positive");
  TransienceSummary out;
  out.Ns.assign(Ns.begin(), Ns.end());
  out.replicas.resize(replicas);
  const std::size_t workers = std::max(1, threads);
  std::vector<std::thread> pool;
  std::exception_ptr error;
  std::mutex error_mutex;
  for (std::size_t t = 0; t < workers; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (std::size_t r = t; r < replicas; r += workers) {
          out.replicas[r] = transience_replica(sampler, u, Ns, law, seed, r);
        }
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);

  for (const auto& rep : out.replicas) {
    for (std::size_t i = 1; i < rep.resistance.size(); ++i) {
      if (Ns[i] >= Ns[i - 1] && rep.resistance[i] < rep.resistance[i - 1] * (1 - 1e-6)) ++out.monotonicity_violations;
    }
  }
  for (std::size_t i = 0; i < Ns.size(); ++i) {
    std::vector<double> col;
    for (const auto& rep : out.replicas) col.push_back(rep.resistance[i]);
    out.q1.push_back(quantile(col, 0.25));
    out.median.push_back(quantile(col, 0.5));
    out.q3.push_back(quantile(col, 0.75));
  }
  return out;
}

}  // namespace interlace
