// Equilibrium measure, capacity, hitting probabilities and h-transformed
// walk kernels for finite subsets of Z^d.
#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

#include "interlace/green.hpp"
#include "interlace/lattice.hpp"

namespace interlace {

struct PotentialOptions {
  std::size_t support_cap = 4096;     // largest dense solve accepted
  double residual_tolerance = 1e-10;  // on ||G e - 1||_inf
};

class PotentialError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct EquilibriumProfile {
  std::vector<Point> points;       // K, in the order given (duplicates removed)
  std::vector<double> weights;     // e_K per point; zero off the inner boundary
  std::vector<double> normalized;  // weights / capacity
  double capacity = 0.0;
  double residual = 0.0;           // achieved ||G e - 1||_inf on the support
};

/// Factored equilibrium problem for a fixed K.
///
/// Only the inner boundary S of K (points with a neighbour outside K) can
/// carry equilibrium mass, so the system solved is G_S e = 1 with
/// (G_S)_{xy} = g(x - y). The Cholesky factor is kept and reused for hitting
/// probabilities and harmonic measures.
class EquilibriumSystem {
 public:
  EquilibriumSystem(const GreenFunction& green, std::span<const Point> K, PotentialOptions opt = {});
  ~EquilibriumSystem();
  EquilibriumSystem(EquilibriumSystem&&) noexcept;
  EquilibriumSystem& operator=(EquilibriumSystem&&) noexcept;

  const EquilibriumProfile& profile() const;
  double capacity() const { return profile().capacity; }

  /// Indices into profile().points of the support S.
  const std::vector<std::size_t>& support() const;
  bool contains(const Point& x) const;

  /// P_x[H_K < inf] = sum_y g(x - y) e_K(y), clamped to [0, 1]; 1 on K.
  double hitting_probability(const Point& x) const;

  /// Harmonic measure P_x[H_K < inf, X_{H_K} = z] for z in the support,
  /// in support order. For x outside K; entries sum to hitting_probability(x).
  std::vector<double> harmonic_measure(const Point& x) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

EquilibriumProfile equilibrium_measure(const GreenFunction& green, std::span<const Point> K,
                                       PotentialOptions opt = {});

double hitting_probability(const GreenFunction& green, const Point& x, std::span<const Point> K,
                           PotentialOptions opt = {});

enum class KernelMode { avoid, hit };

/// Doob transform of the SRW kernel at x: weights over neighbors(x), in that
/// order, proportional to h(y) with h = P_y[H_K = inf] (avoid) or
/// h = P_y[H_K < inf] (hit). Throws PotentialError when every weight is 0.
std::vector<double> conditioned_kernel(const EquilibriumSystem& system, const Point& x, KernelMode mode);

std::vector<double> conditioned_kernel(const GreenFunction& green, const Point& x, std::span<const Point> K,
                                       KernelMode mode, PotentialOptions opt = {});

}  // namespace interlace
