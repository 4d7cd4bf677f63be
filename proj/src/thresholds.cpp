#include "interlace/thresholds.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "interlace/noise.hpp"
#include "interlace/percolation.hpp"

namespace interlace {

double density(double u, double g0) {
  if (!(u >= 0)) throw std::invalid_argument("density needs u >= 0");
  return -std::expm1(-u / g0);
}

double density(double u, const GreenFunction& green) { return density(u, green.at_origin()); }

Interval wilson_interval(std::size_t k, std::size_t n, double z) {
  if (n == 0) return {0, 1};
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(k) / nn;
  const double z2 = z * z;
  const double centre = (p + z2 / (2 * nn)) / (1 + z2 / nn);
  const double half = z * std::sqrt(p * (1 - p) / nn + z2 / (4 * nn * nn)) / (1 + z2 / nn);
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

namespace {

template <class F>
void parallel_replicas(std::size_t replicas, int threads, F&& work) {
  const std::size_t workers = static_cast<std::size_t>(std::max(1, threads));
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < workers; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (std::size_t r = t; r < replicas; r += workers) work(r);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace

ThresholdStudy run_threshold_study(const GreenFunction& green, const StudyConfig& config) {
  if (config.L < 2) throw std::invalid_argument("threshold study needs L >= 2");
  if (config.replicas == 0) throw std::invalid_argument("replicas must be positive");
  if (config.eps.empty()) throw std::invalid_argument("noise grid must be nonempty");
  if (!(config.u_max > 0)) throw std::invalid_argument("u_max must be positive");
  for (double e : config.eps) {
    if (!(e >= 0 && e < 0.5)) throw std::invalid_argument("threshold noise levels must lie in [0, 1/2)");
  }
  for (double u : config.u_grid) {
    if (!(u > 0 && u <= config.u_max)) throw std::invalid_argument("u grid must lie in (0, u_max]");
  }

  const int L = config.L;
  const int n = L / 2;
  const Point origin(green.dim());
  const Window window = Window::ball(origin, 2 * L);
  SamplerOptions so;
  so.potential = config.potential;
  const WindowSampler sampler(green, window, so);

  ThresholdStudy study;
  study.config = config;
  study.capacity = sampler.capacity();
  study.crossing_level.assign(config.eps.size(), std::vector<double>(config.replicas));
  study.connection_level.resize(config.replicas);
  study.lu.assign(config.replicas, std::vector<std::uint8_t>(config.u_grid.size(), 0));
  const bool noisy = std::any_of(config.eps.begin(), config.eps.end(), [](double e) { return e > 0; });

  parallel_replicas(config.replicas, config.threads, [&](std::size_t r) {
    Rng rng = make_stream(config.seed, r, "threshold/L" + std::to_string(L));
    const InterlacementSample s = sampler.sample(config.u_max, rng);
    NoiseUniforms uniforms;
    if (noisy) uniforms = draw_noise_uniforms(window, rng);
    for (std::size_t k = 0; k < config.eps.size(); ++k) {
      const std::vector<double> levels = noisy_vacancy_levels(s.vertex_mark, config.eps[k], uniforms);
      study.crossing_level[k][r] = crossing_threshold(window, levels, origin, L, 2 * L);
    }
    study.connection_level[r] = crossing_threshold(window, s.vertex_mark, origin, n, 2 * L);
    if (config.local_uniqueness) {
      for (std::size_t k = 0; k < config.u_grid.size(); ++k) {
        SiteField vac(window);
        for (std::size_t v = 0; v < vac.size(); ++v) vac.set(v, s.vertex_mark[v] > config.u_grid[k]);
        study.lu[r][k] = local_uniqueness_event(Configuration::from_sites(std::move(vac)), origin, n);
      }
    }
  });
  return study;
}

std::vector<CurvePoint> crossing_curve(const ThresholdStudy& study, std::size_t eps_index,
                                       const std::vector<double>& u_grid) {
  const auto& levels = study.crossing_level.at(eps_index);
  std::vector<CurvePoint> out;
  for (double u : u_grid) {
    CurvePoint c;
    c.L = study.config.L;
    c.eps = study.config.eps[eps_index];
    c.u = u;
    c.replicas = levels.size();
    for (double a : levels) c.successes += a > u;
    c.p = static_cast<double>(c.successes) / static_cast<double>(c.replicas);
    c.ci = wilson_interval(c.successes, c.replicas);
    out.push_back(c);
  }
  return out;
}

namespace {

std::vector<double> default_grid(double u_max) {
  std::vector<double> g;
  for (int i = 1; i <= 40; ++i) g.push_back(u_max * i / 40.0);
  return g;
}

ThresholdEstimate median_estimate(const ThresholdStudy& study, std::size_t eps_index, double tolerance,
                                  const std::string& name) {
  const auto& levels = study.crossing_level.at(eps_index);
  const double u_max = study.config.u_max;
  const std::size_t R = levels.size();
  ThresholdEstimate est;
  est.parameter = name;
  est.eps = study.config.eps[eps_index];
  est.Ls = {study.config.L};
  est.replicas = R;
  est.protocol = "crossing B(0,L)->sphere(0,2L) in the noisy vacant set of B(0,2L); bisection of the empirical "
                 "crossing probability at 1/2; 95% order-statistic interval";
  est.curve = crossing_curve(study, eps_index, default_grid(u_max));

  for (std::size_t i = 1; i < est.curve.size(); ++i) {
    if (est.curve[i].p > est.curve[i - 1].p) {
      est.failure = "crossing curve is not monotone in u";
      return est;
    }
  }
  auto phat = [&](double u) {
    std::size_t k = 0;
    for (double a : levels) k += a > u;
    return static_cast<double>(k) / static_cast<double>(R);
  };
  if (phat(u_max) >= 0.5) {
    est.failure = "crossing probability stays >= 1/2 up to u_max = " + std::to_string(u_max) +
                  "; threshold censored (diverges within the sampled range)";
    return est;
  }
  double lo = 0, hi = u_max;
  if (phat(lo) < 0.5) {
    hi = lo;
  } else {
    while (hi - lo > tolerance) {
      const double mid = 0.5 * (lo + hi);
      (phat(mid) >= 0.5 ? lo : hi) = mid;
    }
  }
  est.value = 0.5 * (lo + hi);

  std::vector<double> sorted = levels;
  std::sort(sorted.begin(), sorted.end());
  const double half = 1.96 * std::sqrt(static_cast<double>(R)) / 2;
  const auto clamp_index = [&](double x) {
    return static_cast<std::size_t>(std::clamp(x, 0.0, static_cast<double>(R - 1)));
  };
  const std::size_t klo = clamp_index(std::floor(R / 2.0 - half));
  const std::size_t khi = clamp_index(std::ceil(R / 2.0 + half));
  est.ci.lo = std::clamp(sorted[klo], 0.0, u_max);
  est.ci.hi = std::clamp(sorted[khi], 0.0, u_max);
  est.ci.lo = std::min(est.ci.lo, est.value);
  est.ci.hi = std::max(est.ci.hi, est.value);
  est.ok = true;
  return est;
}

double first_drop(const std::vector<double>& u, const std::vector<double>& p, double level, double fallback) {
  for (std::size_t k = 0; k < u.size(); ++k) {
    if (p[k] < level) {
      if (k == 0) return u[0];
      return u[k - 1] + (p[k - 1] - level) / (p[k - 1] - p[k]) * (u[k] - u[k - 1]);
    }
  }
  return fallback;
}

}  // namespace

ThresholdEstimate estimate_u_star_eps(const ThresholdStudy& study, std::size_t eps_index, double tolerance) {
  return median_estimate(study, eps_index, tolerance, "u_star_eps");
}

ThresholdEstimate estimate_u_star_star(const ThresholdStudy& study, double tolerance) {
  if (study.config.eps.empty() || study.config.eps[0] != 0.0) {
    throw std::invalid_argument("u_star_star needs eps = 0 as the first noise level");
  }
  return median_estimate(study, 0, tolerance, "u_star_star");
}

std::vector<LocalUniquenessPoint> local_uniqueness_table(const ThresholdStudy& study) {
  std::vector<LocalUniquenessPoint> out;
  const auto& grid = study.config.u_grid;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    LocalUniquenessPoint pt;
    pt.u = grid[k];
    pt.replicas = study.connection_level.size();
    for (std::size_t r = 0; r < pt.replicas; ++r) {
      const bool conn = study.connection_level[r] > grid[k];
      const bool uniq = study.lu[r][k] != 0;
      pt.connected += conn;
      pt.unique += uniq;
      pt.both += conn && uniq;
    }
    out.push_back(pt);
  }
  return out;
}

ThresholdEstimate estimate_u_bar(const ThresholdStudy& study) {
  ThresholdEstimate est;
  est.parameter = "u_bar";
  est.Ls = {study.config.L};
  est.replicas = study.connection_level.size();
  est.protocol = "n = L/2: B(0,n) <-> sphere(0,4n) and local uniqueness at n in the vacant set of B(0,4n); "
                 "first grid level where the joint probability drops below 1/2, linearly interpolated; "
                 "interval from the 95% Wilson bands";
  if (!study.config.local_uniqueness || study.config.u_grid.empty()) {
    est.failure = "study has no local-uniqueness grid";
    return est;
  }
  const auto table = local_uniqueness_table(study);
  std::vector<double> u, p, plo, phi;
  for (const auto& pt : table) {
    CurvePoint c;
    c.L = study.config.L;
    c.u = pt.u;
    c.replicas = pt.replicas;
    c.successes = pt.both;
    c.p = static_cast<double>(pt.both) / static_cast<double>(pt.replicas);
    c.ci = wilson_interval(pt.both, pt.replicas);
    est.curve.push_back(c);
    u.push_back(c.u);
    p.push_back(c.p);
    plo.push_back(c.ci.lo);
    phi.push_back(c.ci.hi);
  }
  const double u_max = study.config.u_max;
  if (p.back() >= 0.5) {
    est.failure = "joint probability stays >= 1/2 over the whole grid";
    return est;
  }
  est.value = first_drop(u, p, 0.5, u_max);
  est.ci.lo = std::min(first_drop(u, plo, 0.5, u_max), est.value);
  est.ci.hi = std::max(first_drop(u, phi, 0.5, u_max), est.value);
  est.ok = true;
  return est;
}

}  // namespace interlace
