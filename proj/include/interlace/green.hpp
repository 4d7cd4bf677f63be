// Green function of the simple random walk on Z^d, d >= 3.
#pragma once

#include <array>
#include <cstddef>
#include <stdexcept>
#include <memory>
#include <span>
#include <vector>

#include "interlace/lattice.hpp"

namespace interlace {

struct GreenOptions {
  double abs_tolerance = 1e-13;
  double rel_tolerance = 1e-12;
  int first_level = 6;   // 2^first_level trapezoid panels on the first grid
  int max_level = 15;    // refinement gives up beyond this
  double log_t_min = -40.0;
  double log_t_max = 70.0;
};

/// g(x) = expected number of visits to x of the simple random walk from 0.
///
/// Evaluates the Fourier representation
///   g(x) = (2π)^{-d} ∫ cos(x·θ) / (1 - φ(θ)) dθ,  φ(θ) = (1/d) Σ cos θ_i,
/// after writing 1/(1-φ) = ∫_0^∞ e^{-t(1-φ)} dt and integrating the angles
/// in closed form, which leaves the one-dimensional integral
///   g(x) = ∫_0^∞ Π_i e^{-t/d} I_{|x_i|}(t/d) dt.
/// The integral runs over s = log t with the trapezoid rule; the panel
/// width is halved until two successive grids agree, and the t^{-d/2} tail
/// beyond exp(log_t_max) is added analytically.
///
/// Values are cached per x up to coordinate permutations and sign flips.
/// Safe for concurrent use.
class GreenFunction {
 public:
  explicit GreenFunction(int dim, GreenOptions options = {});
  ~GreenFunction();
  GreenFunction(GreenFunction&&) noexcept;
  GreenFunction& operator=(GreenFunction&&) noexcept;

  int dim() const;
  const GreenOptions& options() const;

  double operator()(const Point& x) const;
  double operator()(std::span<const int> x) const;
  double at_origin() const;

  std::size_t cache_size() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Thrown when successive quadrature grids fail to agree.
class GreenConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Dense lookup of g over all difference vectors with |x_i| <= extent_i.
class GreenTable {
 public:
  GreenTable(const GreenFunction& green, std::span<const int> extents);

  bool covers(std::span<const int> diff) const;
  double operator()(std::span<const int> diff) const;

 private:
  int dim_ = 0;
  std::array<int, kMaxDim> extent_{};
  std::array<std::size_t, kMaxDim> stride_{};
  std::vector<double> values_;
};

}  // namespace interlace
