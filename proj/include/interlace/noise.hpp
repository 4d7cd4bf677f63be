// Quenched Bernoulli noise and dilution fields.
#pragma once

#include <vector>

#include "interlace/fields.hpp"
#include "interlace/rng.hpp"

namespace interlace {

/// i.i.d. Bernoulli(q) bit per vertex.
SiteField bernoulli_site(const Window& w, double q, Rng& rng);
/// i.i.d. Bernoulli(p) bit per window edge.
BondField bernoulli_bond(const Window& w, double p, Rng& rng);

/// occupied XOR theta with theta_x i.i.d. Bernoulli(eps); eps in [0, 1].
SiteField flip_noise(const SiteField& occupied, double eps, Rng& rng);

/// Per-vertex randomness of the monotone coupling: xi_x ~ Bernoulli(eps) and
/// eta_x ~ Bernoulli((1 - 2 eps) / (1 - eps)), both read off two shared
/// uniforms so that one draw serves every eps.
struct NoiseUniforms {
  std::vector<double> xi;
  std::vector<double> eta;
};

NoiseUniforms draw_noise_uniforms(const Window& w, Rng& rng);

/// eta parameter (1 - 2 eps) / (1 - eps).
double coupling_eta(double eps);

/// phi_x = max(xi_x, eta_x * occupied_x), eps in (0, 1/2). Has the law of
/// flip_noise(occupied, eps) and is increasing in `occupied`.
SiteField coupled_noise(const SiteField& occupied, double eps, Rng& rng);
SiteField coupled_noise(const SiteField& occupied, double eps, const NoiseUniforms& uniforms);

/// Coupled noisy occupation thresholds: the vertex is vacant in V^{u,eps}
/// exactly when u < result[x]. Zero when xi_x = 1, +inf when xi_x = eta_x = 0,
/// otherwise the vertex's first-visit mark. eps = 0 returns the marks.
std::vector<double> noisy_vacancy_levels(const std::vector<double>& vertex_mark, double eps,
                                         const NoiseUniforms& uniforms);

}  // namespace interlace
