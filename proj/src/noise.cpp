#include "interlace/noise.hpp"

#include <limits>
#include <stdexcept>
#include <string>

namespace interlace {

namespace {

void require_probability(double q, const char* what) {
  if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument(std::string(what) + " must lie in [0, 1]");
}

void require_coupling_eps(double eps) {
  if (!(eps > 0.0 && eps < 0.5)) throw std::invalid_argument("coupled noise needs eps in (0, 1/2)");
}

}  // namespace

SiteField bernoulli_site(const Window& w, double q, Rng& rng) {
  require_probability(q, "site probability");
  SiteField f(w);
  for (std::size_t v = 0; v < f.size(); ++v) f.set(v, bernoulli(rng, q));
  return f;
}

BondField bernoulli_bond(const Window& w, double p, Rng& rng) {
  require_probability(p, "bond probability");
  BondField f(w);
  for (std::size_t e = 0; e < f.size(); ++e) f.set(e, bernoulli(rng, p));
  return f;
}

SiteField flip_noise(const SiteField& occupied, double eps, Rng& rng) {
  require_probability(eps, "eps");
  SiteField out = occupied;
  for (std::size_t v = 0; v < out.size(); ++v) out.set(v, occupied[v] != bernoulli(rng, eps));
  return out;
}

NoiseUniforms draw_noise_uniforms(const Window& w, Rng& rng) {
  NoiseUniforms n;
  n.xi.resize(w.vertex_count());
  n.eta.resize(w.vertex_count());
  for (std::size_t v = 0; v < n.xi.size(); ++v) {
    n.xi[v] = uniform01(rng);
    n.eta[v] = uniform01(rng);
  }
  return n;
}

double coupling_eta(double eps) {
  require_coupling_eps(eps);
  return (1.0 - 2.0 * eps) / (1.0 - eps);
}

SiteField coupled_noise(const SiteField& occupied, double eps, Rng& rng) {
  return coupled_noise(occupied, eps, draw_noise_uniforms(occupied.window(), rng));
}

SiteField coupled_noise(const SiteField& occupied, double eps, const NoiseUniforms& uniforms) {
  const double q = coupling_eta(eps);
  if (uniforms.xi.size() != occupied.size()) throw std::invalid_argument("noise uniforms do not match the field");
  SiteField out(occupied.window());
  for (std::size_t v = 0; v < out.size(); ++v) {
    const bool xi = uniforms.xi[v] < eps;
    const bool eta = uniforms.eta[v] < q;
    out.set(v, xi || (eta && occupied[v]));
  }
  return out;
}

std::vector<double> noisy_vacancy_levels(const std::vector<double>& vertex_mark, double eps,
                                         const NoiseUniforms& uniforms) {
  if (eps == 0.0) return vertex_mark;
  const double q = coupling_eta(eps);
  if (uniforms.xi.size() != vertex_mark.size()) throw std::invalid_argument("noise uniforms do not match the marks");
  std::vector<double> out(vertex_mark.size());
  for (std::size_t v = 0; v < out.size(); ++v) {
    if (uniforms.xi[v] < eps) {
      out[v] = 0.0;
    } else if (uniforms.eta[v] < q) {
      out[v] = vertex_mark[v];
    } else {
      out[v] = std::numeric_limits<double>::infinity();
    }
  }
  return out;
}

}  // namespace interlace
