#pragma once

#include <optional>

#include "oploop/distribution.hpp"
#include "oploop/dynamics.hpp"

namespace oploop {

// Limit of the opinion law when exploration happens only at k=0:
// (eta x)#mu0 convolved with ((1-eta) x)#rho. Exact for Gaussian/mixture
// inputs; otherwise the convolution falls back to an empirical law.
// eta=0 returns rho exactly, eta=1 returns mu0 exactly.
Distribution no_exploration_limit(const ModelParams& params);

struct Moments {
  double mean = 0.0;
  double variance = 0.0;
};

// Stationary moments under exploration at every step (period 1):
// mean = eta E[mu0] + (1-eta) E[rho],
// var  = eta^2 var(mu0) + (1-alpha-beta)^2 / (1-beta^2) * var(rho).
Moments continuous_exploration_moments(const ModelParams& params);

// The Gaussian stationary law under period-1 exploration when both mu0 and
// rho are Gaussian; throws otherwise.
Distribution continuous_exploration_gaussian_limit(const ModelParams& params);

// Upper bound on W1 between the normalized stationary law and the standard
// normal for inertia beta:
//   (18/pi)^(1/3) * ((1-beta^2)/(e beta^2))^(1/12)
//     * sup_{xi != 0} |C_rho_hat(xi) - C_Phi(xi)| / |xi|^3.
// rho_hat must be normalized (zero mean, unit variance) or the supremum
// diverges; the sup is taken over a log grid |xi| in [1e-3, 1e2] with 2000
// points per sign plus the xi->0 Taylor limit |m3|/6. Returns +infinity if
// the ratio diverges on the grid.
double gaussian_proximity_bound(const Distribution& rho_hat, double beta);

// (X - mean)/std as a pushforward; requires positive variance.
Distribution normalize_distribution(const Distribution& d);

struct MicroMacroExample {
  double w2_sq = 0.0;  // squared W2 between N(0,sigma) and its no-exploration limit
  double delta = 0.0;  // expected squared per-user shift, 2 (1-eta)^2 sigma^2
};

// Closed forms for the Gaussian example mu0 = rho = N(0, sigma):
// w2_sq = sigma^2 (1 - sqrt(eta^2 + (1-eta)^2))^2, delta = 2 (1-eta)^2 sigma^2.
MicroMacroExample example_micro_macro(double sigma, double alpha, double beta);

// One realization of the truncated discounted sum
// sum_{l=0}^{n_terms-1} beta^{n_terms-1-l} (1-beta) X_l with X_l ~ nu i.i.d.
double discounted_sum_sample(const Distribution& nu, double beta, int n_terms,
                             RngStream& rng);

// Smallest n with beta^n below 1e-9: ceil(9 / -log10(beta)).
int discounted_sum_terms(double beta);

enum class LimitRegime { NoExploration, Continuous };

struct LimitReport {
  LimitRegime regime = LimitRegime::NoExploration;
  std::optional<Distribution> limit_law;  // present when a law is available
  double mean = 0.0;
  double variance = 0.0;
  std::optional<double> gaussian_bound;  // Continuous regime, var(rho) > 0
};

LimitReport limit_report(const ModelParams& params, LimitRegime regime);

}  // namespace oploop
