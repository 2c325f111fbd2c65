#include "oploop/limits.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace oploop {
namespace {

constexpr double kNormalizationTol = 1e-9;
constexpr int kGridPointsPerSign = 2000;
constexpr double kGridLogLo = -3.0;
constexpr double kGridLogHi = 2.0;

double std_normal_char(double xi) { return std::exp(-0.5 * xi * xi); }

}  // namespace

Distribution no_exploration_limit(const ModelParams& params) {
  const double eta = params.eta();
  return convolve(pushforward_affine(params.mu0, eta, 0.0),
                  pushforward_affine(params.rho, 1.0 - eta, 0.0));
}

Moments continuous_exploration_moments(const ModelParams& params) {
  const double eta = params.eta();
  const double gamma = params.adoption_weight();
  Moments m;
  m.mean = eta * params.mu0.mean() + (1.0 - eta) * params.rho.mean();
  m.variance = eta * eta * params.mu0.variance() +
               gamma * gamma / (1.0 - params.beta * params.beta) * params.rho.variance();
  return m;
}

Distribution continuous_exploration_gaussian_limit(const ModelParams& params) {
  if (params.mu0.as_gaussian() == nullptr || params.rho.as_gaussian() == nullptr)
    throw std::invalid_argument(
        "continuous exploration limit: closed form requires Gaussian mu0 and rho");
  const Moments m = continuous_exploration_moments(params);
  return Distribution::gaussian(m.mean, std::sqrt(m.variance));
}

double gaussian_proximity_bound(const Distribution& rho_hat, double beta) {
  if (!(std::isfinite(beta) && beta > 0.0 && beta < 1.0))
    throw std::invalid_argument("gaussian_proximity_bound: beta must lie in (0,1)");
  if (std::abs(rho_hat.mean()) > kNormalizationTol ||
      std::abs(rho_hat.variance() - 1.0) > kNormalizationTol)
    throw std::invalid_argument(
        "gaussian_proximity_bound: requires a normalized law (zero mean, unit variance)");

  const double constant =
      std::cbrt(18.0 / M_PI) *
      std::pow((1.0 - beta * beta) / (M_E * beta * beta), 1.0 / 12.0);

  // xi -> 0 limit of |C_rho(xi) - C_Phi(xi)| / |xi|^3 for a normalized law.
  double sup = std::abs(rho_hat.third_central_moment()) / 6.0;
  for (const double sign : {1.0, -1.0}) {
    for (int k = 0; k < kGridPointsPerSign; ++k) {
      const double exponent =
          kGridLogLo + (kGridLogHi - kGridLogLo) * k / (kGridPointsPerSign - 1);
      const double xi = sign * std::pow(10.0, exponent);
      const double ratio =
          std::abs(rho_hat.char_fn(xi) - std_normal_char(xi)) / std::pow(std::abs(xi), 3);
      if (!std::isfinite(ratio)) return std::numeric_limits<double>::infinity();
      sup = std::max(sup, ratio);
    }
  }
  return constant * sup;
}

Distribution normalize_distribution(const Distribution& d) {
  const double var = d.variance();
  if (!(var > 0.0))
    throw std::invalid_argument("normalize: requires positive variance");
  const double s = std::sqrt(var);
  return pushforward_affine(d, 1.0 / s, -d.mean() / s);
}

MicroMacroExample example_micro_macro(double sigma, double alpha, double beta) {
  if (!(std::isfinite(sigma) && sigma > 0.0))
    throw std::invalid_argument("example: sigma must be positive");
  // Reuse the model validation for the weight constraints.
  const ModelParams params(alpha, beta, Distribution::gaussian(0.0, sigma),
                           Distribution::gaussian(0.0, sigma));
  const double eta = params.eta();
  const double r = 1.0 - std::sqrt(eta * eta + (1.0 - eta) * (1.0 - eta));
  MicroMacroExample out;
  out.w2_sq = sigma * sigma * r * r;
  out.delta = 2.0 * (1.0 - eta) * (1.0 - eta) * sigma * sigma;
  return out;
}

double discounted_sum_sample(const Distribution& nu, double beta, int n_terms,
                             RngStream& rng) {
  if (!(std::isfinite(beta) && beta > 0.0 && beta < 1.0))
    throw std::invalid_argument("discounted_sum: beta must lie in (0,1)");
  if (n_terms < 1) throw std::invalid_argument("discounted_sum: n_terms must be positive");
  double s = 0.0;
  for (int l = 0; l < n_terms; ++l) s = beta * s + (1.0 - beta) * nu.sample_one(rng);
  return s;
}

int discounted_sum_terms(double beta) {
  if (!(std::isfinite(beta) && beta > 0.0 && beta < 1.0))
    throw std::invalid_argument("discounted_sum: beta must lie in (0,1)");
  return std::max(1, static_cast<int>(std::ceil(9.0 / -std::log10(beta))));
}

LimitReport limit_report(const ModelParams& params, LimitRegime regime) {
  LimitReport report;
  report.regime = regime;
  const double eta = params.eta();
  if (regime == LimitRegime::NoExploration) {
    report.limit_law = no_exploration_limit(params);
    report.mean = eta * params.mu0.mean() + (1.0 - eta) * params.rho.mean();
    report.variance = eta * eta * params.mu0.variance() +
                      (1.0 - eta) * (1.0 - eta) * params.rho.variance();
  } else {
    const Moments m = continuous_exploration_moments(params);
    report.mean = m.mean;
    report.variance = m.variance;
    if (params.mu0.as_gaussian() != nullptr && params.rho.as_gaussian() != nullptr)
      report.limit_law = continuous_exploration_gaussian_limit(params);
    if (params.rho.variance() > 0.0 && params.beta > 0.0)
      report.gaussian_bound =
          gaussian_proximity_bound(normalize_distribution(params.rho), params.beta);
  }
  return report;
}

}  // namespace oploop
