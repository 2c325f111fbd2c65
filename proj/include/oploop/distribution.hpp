#pragma once

#include <complex>
#include <cstddef>
#include <string>
#include <variant>
#include <vector>

#include "oploop/rng.hpp"

namespace oploop {

struct GaussianSpec {
  double mean = 0.0;
  double stddev = 1.0;
};

struct UniformSpec {
  double lo = 0.0;
  double hi = 1.0;
};

struct MixtureComponent {
  double weight = 1.0;
  GaussianSpec component;
};

struct MixtureSpec {
  std::vector<MixtureComponent> components;
};

struct DiracSpec {
  double point = 0.0;
};

// Samples are kept sorted ascending.
struct EmpiricalSpec {
  std::vector<double> samples;
};

// Sample size used when a convolution has no closed form and falls back to
// an empirical law built from pairwise sums.
inline constexpr std::size_t kConvolveFallbackSamples = 100000;

// One-dimensional law, closed under the operations the simulator needs:
// sampling, CDF/atom queries, moments, affine pushforward, convolution and
// characteristic function evaluation.
class Distribution {
 public:
  using Variant =
      std::variant<GaussianSpec, UniformSpec, MixtureSpec, DiracSpec, EmpiricalSpec>;

  static Distribution gaussian(double mean, double stddev);
  static Distribution uniform(double lo, double hi);
  static Distribution mixture(std::vector<MixtureComponent> components);
  static Distribution dirac(double point);
  static Distribution empirical(std::vector<double> samples);

  double mean() const;
  double variance() const;
  double third_central_moment() const;

  // P(X <= x), right-continuous.
  double cdf(double x) const;
  // P(X == x); zero for the continuous variants.
  double point_mass(double x) const;

  // E[exp(i xi X)]; returns 1 exactly at xi = 0.
  std::complex<double> char_fn(double xi) const;

  double sample_one(RngStream& rng) const;
  std::vector<double> sample(std::size_t n, RngStream& rng) const;

  const Variant& value() const { return v_; }
  const GaussianSpec* as_gaussian() const { return std::get_if<GaussianSpec>(&v_); }

  // Short text form for summaries, e.g. "gaussian(mean=0, std=0.5)".
  std::string describe() const;

 private:
  explicit Distribution(Variant v) : v_(std::move(v)) {}
  Variant v_;
};

// Law of a*X + b.
Distribution pushforward_affine(const Distribution& d, double a, double b);

// Law of X + Y with X, Y independent. Closed form where available
// (Gaussian/mixture/Dirac combinations); otherwise an empirical law built
// from pairwise sums of fresh equal-size samples drawn from a fixed
// internal stream, so repeated calls give identical results.
Distribution convolve(const Distribution& d1, const Distribution& d2,
                      std::size_t fallback_samples = kConvolveFallbackSamples);

}  // namespace oploop
