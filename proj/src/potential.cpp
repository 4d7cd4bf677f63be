#include "interlace/potential.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_map>

namespace interlace {

struct EquilibriumSystem::Impl {
  const GreenFunction* green = nullptr;
  EquilibriumProfile profile;
  std::unordered_map<Point, std::size_t, PointHash> where;
  std::vector<std::size_t> support;
  std::vector<Point> support_points;
  Eigen::VectorXd support_weights;
  Eigen::LLT<Eigen::MatrixXd> llt;

  double g(const Point& x, const Point& y) const { return (*green)(x - y); }
};

EquilibriumSystem::EquilibriumSystem(const GreenFunction& green, std::span<const Point> K, PotentialOptions opt)
    : impl_(std::make_unique<Impl>()) {
  auto& m = *impl_;
  m.green = &green;
  if (K.empty()) throw std::invalid_argument("equilibrium measure of an empty set");
  for (const Point& x : K) {
    if (x.dim() != green.dim()) throw std::invalid_argument("point dimension differs from Green function");
    if (m.where.emplace(x, m.profile.points.size()).second) m.profile.points.push_back(x);
  }
  const auto& pts = m.profile.points;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (const Point& y : neighbors(pts[i])) {
      if (!m.where.contains(y)) {
        m.support.push_back(i);
        break;
      }
    }
  }
  const std::size_t n = m.support.size();
  if (n > opt.support_cap) {
    throw PotentialError("equilibrium support of " + std::to_string(n) + " points exceeds the cap of " +
                         std::to_string(opt.support_cap));
  }
  for (std::size_t i : m.support) m.support_points.push_back(pts[i]);

  // Difference vectors repeat a lot; a dense table over the bounding box is
  // much cheaper than hashing when the box is moderate.
  const int d = green.dim();
  std::vector<int> extent(d, 0);
  for (int a = 0; a < d; ++a) {
    int lo = pts[0][a], hi = pts[0][a];
    for (const Point& p : m.support_points) {
      lo = std::min(lo, p[a]);
      hi = std::max(hi, p[a]);
    }
    extent[a] = hi - lo;
  }
  double table_size = 1;
  for (int e : extent) table_size *= e + 1.0;

  Eigen::MatrixXd G(n, n);
  if (table_size <= 4.0e6) {
    GreenTable table(green, extent);
    std::array<int, kMaxDim> diff{};
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j <= i; ++j) {
        for (int a = 0; a < d; ++a) diff[a] = m.support_points[i][a] - m.support_points[j][a];
        G(i, j) = G(j, i) = table(std::span<const int>(diff.data(), static_cast<std::size_t>(d)));
      }
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j <= i; ++j) G(i, j) = G(j, i) = m.g(m.support_points[i], m.support_points[j]);
    }
  }

  m.llt.compute(G);
  if (m.llt.info() != Eigen::Success) throw PotentialError("Green matrix is not positive definite");
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(n));
  m.support_weights = m.llt.solve(ones);
  const double residual = (G * m.support_weights - ones).lpNorm<Eigen::Infinity>();
  if (!(residual <= opt.residual_tolerance)) {
    throw PotentialError("equilibrium solve residual " + std::to_string(residual) + " above tolerance");
  }

  auto& prof = m.profile;
  prof.residual = residual;
  prof.weights.assign(pts.size(), 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    double w = m.support_weights[static_cast<Eigen::Index>(k)];
    if (w < 0) {
      if (w < -1e-12) throw PotentialError("negative equilibrium weight " + std::to_string(w));
      w = 0;
    }
    prof.weights[m.support[k]] = w;
  }
  prof.capacity = 0;
  for (double w : prof.weights) prof.capacity += w;
  prof.normalized.resize(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) prof.normalized[i] = prof.weights[i] / prof.capacity;
}

EquilibriumSystem::~EquilibriumSystem() = default;
EquilibriumSystem::EquilibriumSystem(EquilibriumSystem&&) noexcept = default;
EquilibriumSystem& EquilibriumSystem::operator=(EquilibriumSystem&&) noexcept = default;

const EquilibriumProfile& EquilibriumSystem::profile() const { return impl_->profile; }
const std::vector<std::size_t>& EquilibriumSystem::support() const { return impl_->support; }
bool EquilibriumSystem::contains(const Point& x) const { return impl_->where.contains(x); }

double EquilibriumSystem::hitting_probability(const Point& x) const {
  if (contains(x)) return 1.0;
  const auto& m = *impl_;
  double h = 0;
  for (std::size_t k = 0; k < m.support.size(); ++k) {
    h += m.g(x, m.support_points[k]) * m.support_weights[static_cast<Eigen::Index>(k)];
  }
  return std::clamp(h, 0.0, 1.0);
}

std::vector<double> EquilibriumSystem::harmonic_measure(const Point& x) const {
  if (contains(x)) throw std::invalid_argument("harmonic measure requested from a point of K");
  const auto& m = *impl_;
  const auto n = static_cast<Eigen::Index>(m.support.size());
  Eigen::VectorXd rhs(n);
  for (Eigen::Index k = 0; k < n; ++k) rhs[k] = m.g(x, m.support_points[static_cast<std::size_t>(k)]);
  const Eigen::VectorXd h = m.llt.solve(rhs);
  std::vector<double> out(static_cast<std::size_t>(n));
  for (Eigen::Index k = 0; k < n; ++k) out[static_cast<std::size_t>(k)] = std::max(0.0, h[k]);
  return out;
}

EquilibriumProfile equilibrium_measure(const GreenFunction& green, std::span<const Point> K, PotentialOptions opt) {
  return EquilibriumSystem(green, K, opt).profile();
}

double hitting_probability(const GreenFunction& green, const Point& x, std::span<const Point> K,
                           PotentialOptions opt) {
  return EquilibriumSystem(green, K, opt).hitting_probability(x);
}

std::vector<double> conditioned_kernel(const EquilibriumSystem& system, const Point& x, KernelMode mode) {
  std::vector<double> w;
  double total = 0;
  for (const Point& y : neighbors(x)) {
    const double hit = system.hitting_probability(y);
    const double h = mode == KernelMode::hit ? hit : 1.0 - hit;
    w.push_back(h);
    total += h;
  }
  if (!(total > 0)) {
    throw PotentialError("conditioned kernel at " + x.str() + " has no admissible neighbour");
  }
  for (double& v : w) v /= total;
  return w;
}

std::vector<double> conditioned_kernel(const GreenFunction& green, const Point& x, std::span<const Point> K,
                                       KernelMode mode, PotentialOptions opt) {
  return conditioned_kernel(EquilibriumSystem(green, K, opt), x, mode);
}

}  // namespace interlace
