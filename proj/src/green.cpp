#include "interlace/green.hpp"

#include <boost/math/special_functions/bessel.hpp>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <shared_mutex>
#include <stdexcept>
#include <string>
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

// Hankel expansion of e^{-z} I_n(z), summed until the terms stop shrinking.
double scaled_bessel_hankel(int n, double z) {
  const double mu = 4.0 * n * n;
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < 4000; ++k) {
    const double odd = 2.0 * k - 1.0;
    const double next = -term * (mu - odd * odd) / (8.0 * k * z);
    if (odd > 2.0 * n && std::abs(next) >= std::abs(term)) break;
    term = next;
    sum += term;
    if (std::abs(term) < 1e-18 * std::abs(sum)) break;
  }
  return sum / std::sqrt(2.0 * std::numbers::pi * z);
}

// e^{-z} I_n(z) for z > 0.
double scaled_bessel_i(int n, double z) {
  if (z <= 700.0) return boost::math::cyl_bessel_i(n, z) * std::exp(-z);
  return scaled_bessel_hankel(n, z);
}

Key canonical(std::span<const int> x) {
  Key k{};
  for (std::size_t i = 0; i < x.size(); ++i) k[i] = std::abs(x[i]);
  std::sort(k.begin(), k.begin() + static_cast<std::ptrdiff_t>(x.size()));
  return k;
}

}  // namespace

struct GreenFunction::Impl {
  int dim;
  GreenOptions opt;

  mutable std::shared_mutex cache_mutex;
  mutable std::unordered_map<Key, double, KeyHash> cache;

  // Scaled Bessel rows e^{-z} I_n(z), n = 0..order_cap, at the nodes of the
  // finest grid; computed on first use.
  mutable std::mutex node_mutex;
  mutable int order_cap = 16;
  mutable std::vector<std::vector<double>> rows;

  std::size_t node_count() const { return (std::size_t{1} << opt.max_level) + 1; }

  double node_s(std::size_t node) const {
    const double h = (opt.log_t_max - opt.log_t_min) / static_cast<double>(node_count() - 1);
    return opt.log_t_min + h * static_cast<double>(node);
  }

  const std::vector<double>& row(std::size_t node) const {
    std::vector<double>& r = rows[node];
    if (r.empty()) {
      r.resize(static_cast<std::size_t>(order_cap) + 1);
      const double z = std::exp(node_s(node)) / dim;
      for (int n = 0; n <= order_cap; ++n) r[static_cast<std::size_t>(n)] = scaled_bessel_i(n, z);
    }
    return r;
  }

  void ensure_order(int n) const {
    if (n <= order_cap) return;
    while (order_cap < n) order_cap *= 2;
    for (auto& r : rows) r.clear();
  }

  double integrand(std::size_t node, const Key& k) const {
    const std::vector<double>& r = row(node);
    double f = std::exp(node_s(node));
    for (int i = 0; i < dim; ++i) f *= r[static_cast<std::size_t>(k[i])];
    return f;
  }

  // ∫_T^∞ (d/(2πt))^{d/2} (1 - c/t) dt with c = Σ (4n²-1) d/8.
  double tail(const Key& k) const {
    const double t = std::exp(opt.log_t_max);
    const double half = 0.5 * dim;
    const double amp = std::pow(dim / (2.0 * std::numbers::pi), half);
    double c = 0.0;
    for (int i = 0; i < dim; ++i) c += (4.0 * k[i] * k[i] - 1.0) * dim / 8.0;
    return amp * (std::pow(t, 1.0 - half) / (half - 1.0) - c * std::pow(t, -half) / half);
  }

  double evaluate(const Key& k) const {
    std::lock_guard lock(node_mutex);
    if (rows.empty()) rows.resize(node_count());
    ensure_order(k[dim - 1]);

    const std::size_t finest = node_count() - 1;
    const double width = opt.log_t_max - opt.log_t_min;
    const double t_tail = tail(k);

    auto stride_at = [&](int level) { return finest >> level; };

    // First grid.
    int level = opt.first_level;
    std::size_t stride = stride_at(level);
    double sum = 0.5 * (integrand(0, k) + integrand(finest, k));
    for (std::size_t node = stride; node < finest; node += stride) sum += integrand(node, k);
    double h = width / static_cast<double>(std::size_t{1} << level);
    double previous = h * sum + t_tail;

    while (++level <= opt.max_level) {
      stride = stride_at(level);
      for (std::size_t node = stride; node < finest; node += 2 * stride) sum += integrand(node, k);
      h *= 0.5;
      const double current = h * sum + t_tail;
      if (std::abs(current - previous) <= std::max(opt.abs_tolerance, opt.rel_tolerance * std::abs(current))) {
        return current;
      }
      previous = current;
    }
    throw GreenConvergenceError("Green function quadrature did not converge at level " +
                                std::to_string(opt.max_level));
  }
};

GreenFunction::GreenFunction(int dim, GreenOptions options) : impl_(std::make_unique<Impl>()) {
  require_dimension(dim);
  if (options.first_level < 2 || options.max_level <= options.first_level || options.max_level > 24) {
    throw std::invalid_argument("invalid Green quadrature levels");
  }
  impl_->dim = dim;
  impl_->opt = options;
}

GreenFunction::~GreenFunction() = default;
GreenFunction::GreenFunction(GreenFunction&&) noexcept = default;
GreenFunction& GreenFunction::operator=(GreenFunction&&) noexcept = default;

int GreenFunction::dim() const { return impl_->dim; }
const GreenOptions& GreenFunction::options() const { return impl_->opt; }

double GreenFunction::operator()(const Point& x) const { return (*this)(x.coords()); }

double GreenFunction::operator()(std::span<const int> x) const {
  if (static_cast<int>(x.size()) != impl_->dim) {
    throw std::invalid_argument("Green function argument has wrong dimension");
  }
  const Key k = canonical(x);
  {
    std::shared_lock lock(impl_->cache_mutex);
    if (auto it = impl_->cache.find(k); it != impl_->cache.end()) return it->second;
  }
  const double value = impl_->evaluate(k);
  std::unique_lock lock(impl_->cache_mutex);
  impl_->cache.emplace(k, value);
  return value;
}

double GreenFunction::at_origin() const {
  std::array<int, kMaxDim> zero{};
  return (*this)(std::span<const int>(zero.data(), static_cast<std::size_t>(impl_->dim)));
}

std::size_t GreenFunction::cache_size() const {
  std::shared_lock lock(impl_->cache_mutex);
  return impl_->cache.size();
}

// ---------------------------------------------------------------------------

GreenTable::GreenTable(const GreenFunction& green, std::span<const int> extents) : dim_(green.dim()) {
  if (static_cast<int>(extents.size()) != dim_) throw std::invalid_argument("GreenTable extents dimension");
  std::size_t n = 1;
  for (int a = 0; a < dim_; ++a) {
    if (extents[a] < 0) throw std::invalid_argument("GreenTable extents must be nonnegative");
    extent_[a] = extents[a];
    stride_[a] = n;
    n *= static_cast<std::size_t>(extents[a]) + 1;
  }
  values_.resize(n);
  std::array<int, kMaxDim> x{};
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t rest = i;
    for (int a = 0; a < dim_; ++a) {
      x[a] = static_cast<int>(rest % (static_cast<std::size_t>(extent_[a]) + 1));
      rest /= static_cast<std::size_t>(extent_[a]) + 1;
    }
    values_[i] = green(std::span<const int>(x.data(), static_cast<std::size_t>(dim_)));
  }
}

bool GreenTable::covers(std::span<const int> diff) const {
  for (int a = 0; a < dim_; ++a) {
    if (std::abs(diff[a]) > extent_[a]) return false;
  }
  return true;
}

double GreenTable::operator()(std::span<const int> diff) const {
  std::size_t i = 0;
  for (int a = 0; a < dim_; ++a) i += static_cast<std::size_t>(std::abs(diff[a])) * stride_[a];
  return values_[i];
}

}  // namespace interlace
