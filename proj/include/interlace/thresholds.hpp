// Density formula and finite-size estimators for the critical levels.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "interlace/green.hpp"
#include "interlace/sampler.hpp"

namespace interlace {

/// m(u) = 1 - exp(-u / g(0)).
double density(double u, double g0);
double density(double u, const GreenFunction& green);

/// Wilson score interval for k successes out of n.
struct Interval {
  double lo = 0;
  double hi = 1;
};
Interval wilson_interval(std::size_t k, std::size_t n, double z = 1.96);

struct CurvePoint {
  int L = 0;
  double eps = 0;
  double u = 0;
  std::size_t replicas = 0;
  std::size_t successes = 0;
  double p = 0;
  Interval ci;
};

struct ThresholdEstimate {
  std::string parameter;  // u_star_eps | u_star_star | u_bar
  double eps = 0;
  bool ok = false;
  std::string failure;
  double value = 0;
  Interval ci;
  std::vector<int> Ls;
  std::size_t replicas = 0;
  std::string protocol;
  std::vector<CurvePoint> curve;
};

struct StudyConfig {
  int L = 6;                          // crossing B(0, L) -> sphere(0, 2L) in the window B(0, 2L)
  std::vector<double> eps{0.0};       // noise levels, coupled through shared uniforms
  double u_max = 6.0;                 // samples are drawn at u_max and thinned
  std::vector<double> u_grid;         // levels for the local-uniqueness curve
  bool local_uniqueness = true;
  std::size_t replicas = 100;
  std::uint64_t seed = 1;
  int threads = 1;
  PotentialOptions potential{};
};

/// Per-replica evidence at one window size. For every replica and noise
/// level, `crossing_level` holds the largest u at which the noisy vacant set
/// still crosses (crossing holds exactly for u below it; values >= u_max are
/// censored). `connection_level` is the same for B(0, L/2) -> sphere(0, 2L)
/// at eps = 0, and `lu[r][k]` the local-uniqueness indicator with n = L/2 at
/// u_grid[k].
struct ThresholdStudy {
  StudyConfig config;
  double capacity = 0;
  std::vector<std::vector<double>> crossing_level;  // [eps][replica]
  std::vector<double> connection_level;             // [replica]
  std::vector<std::vector<std::uint8_t>> lu;        // [replica][u]
};

ThresholdStudy run_threshold_study(const GreenFunction& green, const StudyConfig& config);

/// P[crossing at u] per grid level for noise level index `eps_index`.
std::vector<CurvePoint> crossing_curve(const ThresholdStudy& study, std::size_t eps_index,
                                       const std::vector<double>& u_grid);

/// Bisection of the empirical crossing curve at probability 1/2 (the median
/// of the per-replica crossing levels), with an order-statistic 95% interval.
/// Reports failure when the curve stays above 1/2 up to u_max.
ThresholdEstimate estimate_u_star_eps(const ThresholdStudy& study, std::size_t eps_index, double tolerance = 1e-3);

/// The same estimator at eps = 0 (requires eps[0] == 0).
ThresholdEstimate estimate_u_star_star(const ThresholdStudy& study, double tolerance = 1e-3);

struct LocalUniquenessPoint {
  double u = 0;
  std::size_t replicas = 0;
  std::size_t connected = 0;  // B(0, n) <-> sphere(0, 4n)
  std::size_t unique = 0;     // local uniqueness at n
  std::size_t both = 0;
};

std::vector<LocalUniquenessPoint> local_uniqueness_table(const ThresholdStudy& study);

/// First grid level where P[connection and local uniqueness] drops below
/// 1/2, linearly interpolated; the interval comes from the Wilson bands.
ThresholdEstimate estimate_u_bar(const ThresholdStudy& study);

}  // namespace interlace
