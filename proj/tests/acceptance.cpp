// Acceptance suite: one line per criterion, nonzero exit if any fails.
//
//   acceptance            run all twelve
//   acceptance 3 7 10     run a subset

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "interlace/green.hpp"
#include "interlace/noise.hpp"
#include "interlace/percolation.hpp"
#include "interlace/potential.hpp"
#include "interlace/renorm.hpp"
#include "interlace/resistance.hpp"
#include "interlace/sampler.hpp"
#include "interlace/thresholds.hpp"
#include "support.hpp"

using namespace interlace;
using namespace testing_support;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string fmt(const char* f, double a, double b) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

std::string fmt(const char* f, double a, double b, double c) {
  char buf[200];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

const GreenFunction& green() {
  static const GreenFunction g(3);
  return g;
}

std::vector<Point> box_points(const Point& corner, int a, int b, int c) {
  std::vector<Point> K;
  for (int i = 0; i < a; ++i)
    for (int j = 0; j < b; ++j)
      for (int k = 0; k < c; ++k) K.push_back(corner + Point{i, j, k});
  return K;
}

struct Moments {
  double n = 0, sum = 0, sum2 = 0;
  void add(double x) {
    n += 1;
    sum += x;
    sum2 += x * x;
  }
  double mean() const { return sum / n; }
  double var() const { return (sum2 - sum * sum / n) / (n - 1); }
  double sem() const { return std::sqrt(var() / n); }
};

// Poisson(mu) goodness of fit; cells with expected count >= 5, tail pooled.
double poisson_chi2_p(const std::vector<std::size_t>& hist, std::size_t n, double mu) {
  std::vector<double> expected;
  std::vector<double> observed;
  double pk = std::exp(-mu), tail_p = 1.0;
  std::size_t k = 0;
  while (true) {
    const double e = pk * static_cast<double>(n);
    const double rest = (tail_p - pk) * static_cast<double>(n);
    if (e < 5 || rest < 5) break;
    expected.push_back(e);
    observed.push_back(k < hist.size() ? static_cast<double>(hist[k]) : 0.0);
    tail_p -= pk;
    ++k;
    pk *= mu / static_cast<double>(k);
  }
  double tail_obs = 0;
  for (std::size_t j = k; j < hist.size(); ++j) tail_obs += static_cast<double>(hist[j]);
  expected.push_back(tail_p * static_cast<double>(n));
  observed.push_back(tail_obs);
  double chi2 = 0;
  for (std::size_t i = 0; i < expected.size(); ++i) {
    chi2 += (observed[i] - expected[i]) * (observed[i] - expected[i]) / expected[i];
  }
  return chi2_sf(chi2, static_cast<double>(expected.size() - 1));
}

// ---------------------------------------------------------------------------
// 1 and 2 share one run: 1e5 exact samples of the 4x2x2 window at u = 2 with
// traces kept, thinned to u = 1 and u = 0.5.

struct VacancyRun {
  static constexpr int kReplicas = 100000;
  std::vector<std::string> names{"{0}", "{0,e1}", "{0,3e1}", "2x2x2"};
  std::vector<std::vector<Point>> sets;
  std::vector<double> caps;
  std::vector<double> levels{0.5, 1.0, 2.0};
  // [set][level]
  std::vector<std::vector<std::size_t>> vacant;
  std::vector<std::vector<Moments>> counts;
  std::vector<std::vector<std::vector<std::size_t>>> hist;
  double seconds = 0;
};

const VacancyRun& vacancy_run() {
  static const VacancyRun run = [] {
    VacancyRun r;
    const auto t0 = std::chrono::steady_clock::now();
    const Point o{0, 0, 0};
    r.sets = {{o}, {o, Point{1, 0, 0}}, {o, Point{3, 0, 0}}, box_points(o, 2, 2, 2)};
    for (const auto& K : r.sets) r.caps.push_back(equilibrium_measure(green(), K).capacity);
    const Window w(o, {4, 2, 2});
    SamplerOptions opt;
    opt.keep_traces = true;
    const WindowSampler sampler(green(), w, opt);
    const std::size_t ns = r.sets.size(), nl = r.levels.size();
    r.vacant.assign(ns, std::vector<std::size_t>(nl, 0));
    r.counts.assign(ns, std::vector<Moments>(nl));
    r.hist.assign(ns, std::vector<std::vector<std::size_t>>(nl));
    std::vector<std::vector<std::uint8_t>> in_set(ns, std::vector<std::uint8_t>(w.vertex_count(), 0));
    for (std::size_t k = 0; k < ns; ++k) {
      for (const Point& x : r.sets[k]) in_set[k][w.index(x)] = 1;
    }
    for (int rep = 0; rep < VacancyRun::kReplicas; ++rep) {
      Rng rng = make_stream(1, static_cast<std::uint64_t>(rep), "acceptance/vacancy");
      const InterlacementSample s = sampler.sample(2.0, rng);
      for (std::size_t k = 0; k < ns; ++k) {
        // first mark at which K is hit, and the marks of the trajectories hitting K
        double first = kUnvisited;
        for (const Point& x : r.sets[k]) first = std::min(first, s.vertex_mark[w.index(x)]);
        std::vector<double> hitting;
        for (const Trajectory& t : s.traces) {
          bool hits = false;
          for (std::size_t v : t.vertices) hits = hits || in_set[k][v];
          if (hits) hitting.push_back(t.mark);
        }
        for (std::size_t l = 0; l < nl; ++l) {
          const double u = r.levels[l];
          r.vacant[k][l] += first > u;
          std::size_t n = 0;
          for (double m : hitting) n += m <= u;
          r.counts[k][l].add(static_cast<double>(n));
          auto& h = r.hist[k][l];
          if (h.size() <= n) h.resize(n + 1, 0);
          ++h[n];
        }
      }
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
  }();
  return run;
}

Outcome criterion_vacancy_law() {
  const VacancyRun& r = vacancy_run();
  Outcome out;
  double worst = 0;
  std::string where;
  const double n = VacancyRun::kReplicas;
  for (std::size_t k = 0; k < r.sets.size(); ++k) {
    for (std::size_t l = 0; l < r.levels.size(); ++l) {
      const double p = std::exp(-r.levels[l] * r.caps[k]);
      const double z = (static_cast<double>(r.vacant[k][l]) / n - p) / std::sqrt(p * (1 - p) / n);
      if (std::abs(z) > worst) {
        worst = std::abs(z);
        where = r.names[k] + fmt(" u=%.1f", r.levels[l]);
      }
      if (std::abs(z) > 3) out.pass = false;
    }
  }
  out.detail = "12 (K, u) cells at 1e5 replicas, worst |z| = " + fmt("%.2f", worst) + " at " + where +
               fmt(", sampling took %.0f s", r.seconds);
  return out;
}

Outcome criterion_poisson_counts() {
  const VacancyRun& r = vacancy_run();
  Outcome out;
  double worst_mean = 0, worst_var = 0, min_p = 1;
  for (std::size_t k = 0; k < r.sets.size(); ++k) {
    for (std::size_t l = 0; l < r.levels.size(); ++l) {
      const Moments& m = r.counts[k][l];
      const double mu = r.levels[l] * r.caps[k];
      const double zm = (m.mean() - mu) / std::sqrt(mu / m.n);
      const double zv = (m.var() - mu) / std::sqrt((mu + 2 * mu * mu) / m.n);
      const double p = poisson_chi2_p(r.hist[k][l], static_cast<std::size_t>(m.n), mu);
      worst_mean = std::max(worst_mean, std::abs(zm));
      worst_var = std::max(worst_var, std::abs(zv));
      min_p = std::min(min_p, p);
      if (std::abs(zm) > 3 || std::abs(zv) > 3 || !(p > 0.001)) out.pass = false;
    }
  }
  out.detail = "N_K over 12 (K, u) cells: worst mean |z| = " + fmt("%.2f", worst_mean) +
               ", worst variance |z| = " + fmt("%.2f", worst_var) + ", smallest chi2 p = " + fmt("%.3g", min_p);
  return out;
}

// ---------------------------------------------------------------------------

Outcome criterion_green() {
  Outcome out;
  const double quad = green().at_origin();
  const double series = green_origin_by_return_series(1000000);
  const double diff = std::abs(quad - series);
  if (!(diff < 1e-6)) out.pass = false;

  // sampled visit counts over 2000 steps against the truncated series
  Rng rng = make_stream(3, 0, "acceptance/green");
  const int walks = 20000, T = 2000;
  Moments visits;
  for (int w = 0; w < walks; ++w) {
    Point x(3);
    int v = 1;
    for (int t = 1; t <= T; ++t) {
      x = srw_step(x, rng);
      v += x.norm_inf() == 0;
    }
    visits.add(v);
  }
  double p_prev = 1.0, p = 1.0 / 6.0, truncated = 1.0 + p;
  for (long n = 2; n <= T / 2; ++n) {
    const double nn = static_cast<double>(n);
    const double next = (2 * (2 * nn - 1) * (10 * nn * nn - 10 * nn + 3) * p / 36.0 -
                         36 * (nn - 1) * (2 * nn - 1) * (2 * nn - 3) * p_prev / 1296.0) /
                        (nn * nn * nn);
    p_prev = p;
    p = next;
    truncated += p;
  }
  const double zmc = (visits.mean() - truncated) / visits.sem();
  if (std::abs(zmc) > 3) out.pass = false;

  double worst = 0;
  for (int i = 0; i < 100; ++i) {
    Point x = rand_point(rng, 3, -20, 20);
    if (x.norm_inf() == 0) x[1] = 3;
    double avg = 0;
    for (const Point& y : neighbors(x)) avg += green()(y) / 6;
    worst = std::max(worst, std::abs(green()(x) - avg));
  }
  if (!(worst < 1e-10)) out.pass = false;
  out.detail = fmt("g(0) quadrature %.12f vs return-series %.12f (diff %.1e)", quad, series, diff) +
               fmt("; sampled visits z = %.2f", zmc) + fmt("; max harmonicity residual %.1e on 100 points", worst);
  return out;
}

// ---------------------------------------------------------------------------

Outcome criterion_density() {
  Outcome out;
  const Window w = Window::cube(Point{0, 0, 0}, 20);
  const WindowSampler sampler(green(), w);
  const std::vector<double> levels{0.5, 1.0, 2.0};
  const int R = 200;
  std::vector<Moments> frac(levels.size());
  for (int r = 0; r < R; ++r) {
    Rng rng = make_stream(4, static_cast<std::uint64_t>(r), "acceptance/density");
    const InterlacementSample s = sampler.sample(2.0, rng);
    for (std::size_t l = 0; l < levels.size(); ++l) {
      std::size_t occ = 0;
      for (double m : s.vertex_mark) occ += m <= levels[l];
      frac[l].add(static_cast<double>(occ) / static_cast<double>(w.vertex_count()));
    }
  }
  out.detail = "20^3 window, 200 replicas:";
  for (std::size_t l = 0; l < levels.size(); ++l) {
    const double m = density(levels[l], green());
    const double z = (frac[l].mean() - m) / frac[l].sem();
    if (std::abs(z) > 3) out.pass = false;
    out.detail += fmt(" u=%.1f m=%.4f", levels[l], m) + fmt(" got %.4f (z=%.2f)", frac[l].mean(), z);
  }
  return out;
}

// ---------------------------------------------------------------------------

Outcome criterion_coupling() {
  Outcome out;
  const Window w = Window::cube(Point{0, 0, 0}, 8);
  const WindowSampler sampler(green(), w);
  const std::vector<double> levels{0.5, 1.0, 2.0};
  const double eps = 0.1;
  std::size_t occupied_violations = 0, vacant_violations = 0, level_mismatch = 0;
  const int R = 10000;
  for (int r = 0; r < R; ++r) {
    Rng rng = make_stream(5, static_cast<std::uint64_t>(r), "acceptance/coupling");
    const InterlacementSample s = sampler.sample(2.0, rng);
    const NoiseUniforms un = draw_noise_uniforms(w, rng);
    std::vector<SiteField> occ, noisy_vacant;
    for (double u : levels) {
      const InterlacementSample t = thin(s, u);
      occ.push_back(t.occupied);
      noisy_vacant.push_back(coupled_noise(t.occupied, eps, un).complement());
    }
    for (std::size_t l = 1; l < levels.size(); ++l) {
      occupied_violations += !occ[l - 1].subset_of(occ[l]);
      vacant_violations += !noisy_vacant[l].subset_of(noisy_vacant[l - 1]);
    }
    const auto level = noisy_vacancy_levels(s.vertex_mark, eps, un);
    for (std::size_t l = 0; l < levels.size(); ++l) {
      for (std::size_t v = 0; v < w.vertex_count(); ++v) level_mismatch += (levels[l] < level[v]) != noisy_vacant[l][v];
    }
  }
  out.pass = occupied_violations == 0 && vacant_violations == 0 && level_mismatch == 0;
  out.detail = "1e4 replicas on 8^3, u in {0.5,1,2}, eps=0.1: " + std::to_string(occupied_violations) +
               " I-nesting violations, " + std::to_string(vacant_violations) + " V^{u,eps} reverse-nesting violations, " +
               std::to_string(level_mismatch) + " level/field mismatches";
  return out;
}

// ---------------------------------------------------------------------------

Outcome criterion_half_noise() {
  Outcome out;
  const Window w = Window::cube(Point{0, 0, 0}, 8);
  const WindowSampler sampler(green(), w);
  const std::size_t n = w.vertex_count();
  const int R = 10000;
  out.detail = "8^3 windows, 1e4 replicas:";
  for (double u : {0.5, 2.0}) {
    std::vector<double> hist(n + 1, 0);
    for (int r = 0; r < R; ++r) {
      Rng rng = make_stream(6, static_cast<std::uint64_t>(r), "acceptance/half/" + std::to_string(u));
      const InterlacementSample s = sampler.sample(u, rng);
      hist[flip_noise(s.occupied, 0.5, rng).count()] += 1;
    }
    // Binomial(512, 1/2) cells with expected count >= 5, both tails pooled
    std::vector<double> pmf(n + 1);
    for (std::size_t k = 0; k <= n; ++k) {
      pmf[k] = std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) - n * std::log(2.0));
    }
    std::size_t lo = 0;
    double low_p = 0, low_obs = 0;
    while (R * (low_p + pmf[lo]) < 5) {
      low_p += pmf[lo];
      low_obs += hist[lo];
      ++lo;
    }
    low_p += pmf[lo];
    low_obs += hist[lo];
    const std::size_t hi = n - lo;  // symmetric
    double chi2 = 0;
    std::size_t cells = 0;
    auto cell = [&](double obs, double p) {
      const double e = R * p;
      chi2 += (obs - e) * (obs - e) / e;
      ++cells;
    };
    cell(low_obs, low_p);
    for (std::size_t k = lo + 1; k < hi; ++k) cell(hist[k], pmf[k]);
    double high_obs = 0;
    for (std::size_t k = hi; k <= n; ++k) high_obs += hist[k];
    cell(high_obs, low_p);
    const double p = chi2_sf(chi2, static_cast<double>(cells - 1));
    if (!(p > 0.001)) out.pass = false;
    out.detail += fmt(" u=%.1f chi2=%.1f", u, chi2) + fmt(" on %.0f cells p=%.3g", static_cast<double>(cells), p);
  }
  return out;
}

// ---------------------------------------------------------------------------

Outcome criterion_recursion() {
  Outcome out;
  Rng rng = make_stream(7, 0, "acceptance/recursion");
  std::size_t mismatches = 0, positives = 0, checked = 0;
  const int l0 = 4;
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 1 + trial % 2;
    const long long sep = rand_int(rng, 1, 5);
    const ScaleHierarchy h(3, 1, l0, sep);
    const int side = static_cast<int>(h.blocks_per_side(n));
    BlockField f{1, SiteField(Window::cube(Point{0, 0, 0}, side))};
    const double p = n == 1 ? 0.3 * uniform01(rng) : 0.08 * uniform01(rng);
    for (std::size_t v = 0; v < f.bad.size(); ++v) f.bad.set(v, bernoulli(rng, p));
    const auto bad0 = [&](const Point& b) { return f.at(b); };
    for (int k = 0; k <= n; ++k) {
      const bool fast = eval_recursive(f, h, Point{0, 0, 0}, k);
      const bool slow = brute_recursive(bad0, 3, 1, l0, sep, Point{0, 0, 0}, k);
      mismatches += fast != slow;
      positives += slow && k == n;
      ++checked;
    }
  }
  const bool trivial = decoupling_bound(4, 3, 0, 0.0) == 0.25 && decoupling_bound(4, 3, 2, 0.0) == 0.00390625 &&
                       decoupling_bound(4, 3, 3, 0.25 / 4096) == std::ldexp(1.0, -8);
  out.pass = mismatches == 0 && trivial;
  out.detail = std::to_string(checked) + " evaluations on 1e3 random grids (l0=4, n<=2, " + std::to_string(positives) +
               " top-level bad): " + std::to_string(mismatches) + " mismatches; decoupling trivial cases " +
               (trivial ? "exact" : "WRONG");
  return out;
}

// ---------------------------------------------------------------------------

Outcome criterion_cascade() {
  Outcome out;
  const int L0 = 2, l0 = 4;
  const ScaleHierarchy h(3, L0, l0, 2);
  const int side = static_cast<int>(h.L(1)) + L0;
  const Window w = Window::cube(Point{0, 0, 0}, side);
  const Window blocks = Window::cube(Point{0, 0, 0}, l0);
  // P[D_0] = 1 - p^144 ~ 0.01 for the 4^3 box
  const double p = std::pow(0.99, 1.0 / 144.0);
  const int R = 40000;
  std::size_t d0 = 0, d0_trials = 0, d1 = 0;
  for (int r = 0; r < R; ++r) {
    Rng rng = make_stream(8, static_cast<std::uint64_t>(r), "acceptance/cascade");
    const BondField bonds = bernoulli_bond(w, p, rng);
    BlockField f{L0, SiteField(blocks)};
    for (std::size_t b = 0; b < blocks.vertex_count(); ++b) {
      const bool bad = eval_seed_D(bonds, blocks.point(b).scaled(L0), L0);
      f.bad.set(b, bad);
      d0 += bad;
      ++d0_trials;
    }
    d1 += eval_recursive(f, h, Point{0, 0, 0}, 1);
  }
  const double p0 = static_cast<double>(d0) / static_cast<double>(d0_trials);
  const double p1 = static_cast<double>(d1) / R;
  const double bound = std::pow(static_cast<double>(l0), 6) * p0 * p0;
  const double sigma = std::sqrt(std::max(p1 * (1 - p1), 1.0 / R) / R);
  out.pass = p1 <= bound + 3 * sigma;
  out.detail = fmt("l0=4, L0=2, separation 2, 4e4 replicas: P[D_0] = %.4f, P[D_{0,1}] = %.5f", p0, p1) +
               fmt(" <= l0^6 P[D_0]^2 = %.4f", bound);
  return out;
}

// ---------------------------------------------------------------------------

Outcome criterion_path_lift() {
  Outcome out;
  const int L0 = 4;
  const double u = 4.0;
  const double m = density(u, green());
  const Window w(Point{0, 0, 0}, {3 * L0, 2 * L0, 2 * L0});
  const WindowSampler sampler(green(), w);
  const BondField open(w, true);
  const std::vector<Point> pair{Point{0, 0, 0}, Point{L0, 0, 0}};
  std::size_t good = 0, attempts = 0, failures = 0;
  std::string first_failure;
  while (good < 1000 && attempts < 200000) {
    Rng rng = make_stream(9, attempts++, "acceptance/path-lift");
    const InterlacementSample s = sampler.sample(u, rng);
    bool both_good = true;
    for (const Point& x : pair) {
      both_good = both_good && eval_seed_E(s.traversed, x, L0, m) && eval_seed_F(s.traversed, x, L0, m);
    }
    if (!both_good) continue;
    ++good;
    const PathLiftReport rep = path_lift(pair, s.traversed, open, L0, m);
    if (!rep.ok) {
      ++failures;
      if (first_failure.empty()) first_failure = rep.failure;
    }
  }
  out.pass = good == 1000 && failures == 0;
  out.detail = "u=4, L0=4, two adjacent blocks: " + std::to_string(good) + " good configurations in " +
               std::to_string(attempts) + " samples, " + std::to_string(failures) + " lifting failures" +
               (first_failure.empty() ? "" : " (" + first_failure + ")");
  return out;
}

// ---------------------------------------------------------------------------

ResistorNetwork series(const std::vector<double>& r) {
  ResistorNetwork net;
  net.vertex_count = r.size() + 1;
  for (std::size_t i = 0; i < r.size(); ++i) net.edges.push_back({i, i + 1});
  net.resistance = r;
  net.sinks = {r.size()};
  return net;
}

Outcome criterion_resistance() {
  Outcome out;
  Rng rng = make_stream(10, 0, "acceptance/resistance");
  // series and parallel laws
  double worst = 0;
  for (int t = 0; t < 100; ++t) {
    const auto k = static_cast<std::size_t>(rand_int(rng, 1, 40));
    std::vector<double> r(k);
    for (double& x : r) x = 0.1 + 5 * uniform01(rng);
    const double sum = std::accumulate(r.begin(), r.end(), 0.0);
    worst = std::max(worst, std::abs(effective_resistance(series(r)) - sum) / sum);
    ResistorNetwork par;
    par.vertex_count = 2;
    double g = 0;
    for (double x : r) {
      par.edges.push_back({0, 1});
      par.resistance.push_back(x);
      g += 1 / x;
    }
    par.sinks = {1};
    worst = std::max(worst, std::abs(effective_resistance(par) * g - 1));
  }
  if (!(worst < 1e-8)) out.pass = false;

  // Rayleigh monotonicity against the dense Kirchhoff oracle
  std::size_t violations = 0, disagreements = 0;
  for (int t = 0; t < 1000; ++t) {
    const auto n = static_cast<std::size_t>(rand_int(rng, 3, 25));
    const ResistorNetwork net = rand_network(rng, n, uniform_index(rng, 2 * n));
    ResistorNetwork fewer = net;
    const std::size_t drop = uniform_index(rng, net.edges.size());
    fewer.edges.erase(fewer.edges.begin() + static_cast<long>(drop));
    fewer.resistance.erase(fewer.resistance.begin() + static_cast<long>(drop));
    ResistorNetwork heavier = net;
    heavier.resistance[uniform_index(rng, net.edges.size())] *= 1 + 9 * uniform01(rng);
    const double r0 = effective_resistance(net), o0 = kirchhoff_resistance(net);
    const double r1 = effective_resistance(fewer), o1 = kirchhoff_resistance(fewer);
    const double r2 = effective_resistance(heavier), o2 = kirchhoff_resistance(heavier);
    for (auto [a, b] : {std::pair{r0, o0}, std::pair{r1, o1}, std::pair{r2, o2}}) {
      const bool same = (std::isinf(a) && std::isinf(b)) || std::abs(a - b) <= 1e-7 * b;
      disagreements += !same;
    }
    violations += r1 < r0 * (1 - 1e-9);
    violations += r2 < r0 * (1 - 1e-9);
  }
  if (violations || disagreements) out.pass = false;

  // Z^3 against Z^2 on full lattices, N in {3, 6, 12, 24}
  const std::vector<int> Ns{3, 6, 12, 24};
  auto profile = [&](const Window& w) {
    const auto cfg = Configuration::from_bonds(BondField(w, true));
    return resistance_profile(cfg, std::vector<double>(w.edge_count(), 1.0), Point{0, 0, 0}, Ns);
  };
  const auto r3 = profile(Window::ball(Point{0, 0, 0}, 24));
  const auto r2 = profile(Window(Point{-24, -24, 0}, {49, 49, 1}));
  std::vector<double> inc3, inc2;
  for (std::size_t i = 1; i < Ns.size(); ++i) {
    inc3.push_back(r3[i] - r3[i - 1]);
    inc2.push_back(r2[i] - r2[i - 1]);
  }
  bool geometric = true;
  for (std::size_t i = 1; i < inc3.size(); ++i) geometric = geometric && inc3[i] <= 0.6 * inc3[i - 1];
  const bool z3_bounded = geometric && inc3.back() < 0.01;
  const bool z2_growing = *std::min_element(inc2.begin(), inc2.end()) >= 0.09;
  if (!z3_bounded || !z2_growing) out.pass = false;

  out.detail = fmt("series/parallel max rel error %.1e", worst) + "; 1e3 random networks: " +
               std::to_string(violations) + " Rayleigh violations, " + std::to_string(disagreements) +
               " oracle disagreements; doubling-N increments Z^3 " +
               fmt("%.4f %.4f %.4f", inc3[0], inc3[1], inc3[2]) + ", Z^2 " +
               fmt("%.4f %.4f %.4f", inc2[0], inc2[1], inc2[2]);
  return out;
}

// ---------------------------------------------------------------------------

Outcome criterion_covariance() {
  Outcome out;
  const int len = 24, K = 8;
  const Window w(Point{0, 0, 0}, {len, 1, 1});
  const WindowSampler sampler(green(), w);
  const int R = 100000, batches = 100, per = R / batches;
  // per batch: mean over pairs of the covariance estimate at each distance
  std::vector<std::vector<double>> cov(batches, std::vector<double>(K + 1, 0));
  for (int b = 0; b < batches; ++b) {
    std::vector<double> single(len, 0);
    std::vector<std::vector<double>> joint(K + 1, std::vector<double>(len, 0));
    for (int r = 0; r < per; ++r) {
      Rng rng = make_stream(11, static_cast<std::uint64_t>(b * per + r), "acceptance/covariance");
      const InterlacementSample s = sampler.sample(1.0, rng);
      for (int i = 0; i < len; ++i) {
        const bool vi = !s.occupied[static_cast<std::size_t>(i)];
        single[i] += vi;
        for (int k = 1; k <= K && i + k < len; ++k) joint[k][i] += vi && !s.occupied[static_cast<std::size_t>(i + k)];
      }
    }
    for (int k = 1; k <= K; ++k) {
      double c = 0;
      for (int i = 0; i + k < len; ++i) c += joint[k][i] / per - (single[i] / per) * (single[i + k] / per);
      cov[b][k] = c / (len - k);
    }
  }
  auto summary = [&](const std::function<double(const std::vector<double>&)>& stat) {
    Moments m;
    for (const auto& c : cov) m.add(stat(c));
    return std::pair{m.mean(), m.sem()};
  };
  const double g0 = green().at_origin();
  out.detail = "u=1, 24-site line, 1e5 replicas; cov(k) est/exact:";
  for (int k = 1; k <= K; ++k) {
    const auto [c, se] = summary([k](const std::vector<double>& v) { return v[k]; });
    const double exact = std::exp(-2.0 / (g0 + green()(Point{k, 0, 0}))) - std::exp(-2.0 / g0);
    if (!(c - 3 * se > 0)) out.pass = false;
    if (k > 1) {
      const auto [d, dse] = summary([k](const std::vector<double>& v) { return v[k - 1] - v[k]; });
      if (d < -3 * dse) out.pass = false;
      if (d <= 0) out.detail += " [point inversion at k=" + std::to_string(k) + "]";
    }
    out.detail += fmt(" %.4f/%.4f", c, exact);
  }
  return out;
}

// ---------------------------------------------------------------------------

Outcome criterion_thresholds() {
  Outcome out;
  const std::vector<double> eps{0.0, 0.02, 0.05};
  std::vector<double> grid;
  for (int i = 1; i <= 32; ++i) grid.push_back(0.25 * i);
  bool ordering = true, eps_monotone = true;
  for (int L : {6, 8}) {
    StudyConfig cfg;
    cfg.L = L;
    cfg.eps = eps;
    cfg.u_max = 8.0;
    cfg.u_grid = grid;
    cfg.replicas = L == 6 ? 400 : 200;
    cfg.seed = 12;
    cfg.potential.support_cap = 8000;
    const ThresholdStudy study = run_threshold_study(green(), cfg);
    const ThresholdEstimate ub = estimate_u_bar(study);
    const ThresholdEstimate uss = estimate_u_star_star(study);
    std::vector<ThresholdEstimate> us;
    for (std::size_t k = 0; k < eps.size(); ++k) us.push_back(estimate_u_star_eps(study, k));
    out.detail += " L=" + std::to_string(L) + ":";
    if (!ub.ok || !uss.ok) {
      ordering = false;
      out.detail += " estimator failure (" + (ub.ok ? uss.failure : ub.failure) + ")";
    } else {
      const double slack = (ub.ci.hi - ub.ci.lo) / 2 + (uss.ci.hi - uss.ci.lo) / 2;
      ordering = ordering && ub.value <= uss.value + slack;
      out.detail += fmt(" ubar %.3f [%.3f,%.3f]", ub.value, ub.ci.lo, ub.ci.hi) +
                    fmt(" <= u** %.3f [%.3f,%.3f]", uss.value, uss.ci.lo, uss.ci.hi) + ";";
    }
    out.detail += " u*(eps)";
    for (std::size_t k = 0; k < eps.size(); ++k) {
      if (!us[k].ok) {
        eps_monotone = false;
        out.detail += " fail";
        continue;
      }
      out.detail += fmt(" %.3f", us[k].value);
      if (k > 0 && us[k - 1].ok && us[k].value > us[k - 1].value) eps_monotone = false;
    }
  }
  out.pass = ordering && eps_monotone;
  out.detail = std::string("ordering ") + (ordering ? "holds" : "FAILS") + ", eps-monotonicity " +
               (eps_monotone ? "holds" : "FAILS") + ";" + out.detail;
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"vacancy law", criterion_vacancy_law},
      {"poisson counts", criterion_poisson_counts},
      {"green function", criterion_green},
      {"density", criterion_density},
      {"coupling monotonicity", criterion_coupling},
      {"eps=1/2 degeneracy", criterion_half_noise},
      {"renormalization recursion", criterion_recursion},
      {"bernoulli cascade bound", criterion_cascade},
      {"path lifting", criterion_path_lift},
      {"resistance", criterion_resistance},
      {"covariance decay", criterion_covariance},
      {"threshold ordering", criterion_thresholds},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && !only.contains(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("threw: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failed += !o.pass;
    std::printf("criterion %2d %-27s %s  %s (%.0f s)\n", id, criteria[i].first, o.pass ? "PASS" : "FAIL",
                o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
