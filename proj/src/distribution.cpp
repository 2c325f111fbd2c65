#include "oploop/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace oploop {
namespace {

constexpr double kWeightSumTol = 1e-12;
constexpr std::uint64_t kConvolveSeed = 0x9D2C5680C0E1F3A7ull;

void require(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}

bool finite(double x) { return std::isfinite(x); }

double gaussian_cdf(double x, const GaussianSpec& g) {
  return 0.5 * std::erfc(-(x - g.mean) / (g.stddev * std::sqrt(2.0)));
}

// sin(t)/t with a three-term Taylor guard near zero.
double sinc(double t) {
  if (std::abs(t) < 1e-4) {
    const double t2 = t * t;
    return 1.0 - t2 / 6.0 + t2 * t2 / 120.0;
  }
  return std::sin(t) / t;
}

std::complex<double> gaussian_char(double xi, const GaussianSpec& g) {
  return std::exp(std::complex<double>(-0.5 * xi * xi * g.stddev * g.stddev,
                                       xi * g.mean));
}

}  // namespace

Distribution Distribution::gaussian(double mean, double stddev) {
  require(finite(mean), "gaussian: mean must be finite");
  require(finite(stddev) && stddev > 0.0, "gaussian: std must be positive");
  return Distribution(GaussianSpec{mean, stddev});
}

Distribution Distribution::uniform(double lo, double hi) {
  require(finite(lo) && finite(hi), "uniform: bounds must be finite");
  require(lo < hi, "uniform: lo must be strictly below hi");
  return Distribution(UniformSpec{lo, hi});
}

Distribution Distribution::mixture(std::vector<MixtureComponent> components) {
  require(!components.empty(), "mixture: needs at least one component");
  double sum = 0.0;
  for (const auto& c : components) {
    require(finite(c.weight) && c.weight > 0.0 && c.weight <= 1.0,
            "mixture: weights must lie in (0,1]");
    require(finite(c.component.mean), "mixture: component mean must be finite");
    require(finite(c.component.stddev) && c.component.stddev > 0.0,
            "mixture: component std must be positive");
    sum += c.weight;
  }
  require(std::abs(sum - 1.0) <= kWeightSumTol, "mixture: weights must sum to 1");
  return Distribution(MixtureSpec{std::move(components)});
}

Distribution Distribution::dirac(double point) {
  require(finite(point), "dirac: point must be finite");
  return Distribution(DiracSpec{point});
}

Distribution Distribution::empirical(std::vector<double> samples) {
  require(!samples.empty(), "empirical: needs at least one sample");
  for (double s : samples) require(finite(s), "empirical: samples must be finite");
  std::sort(samples.begin(), samples.end());
  return Distribution(EmpiricalSpec{std::move(samples)});
}

double Distribution::mean() const {
  return std::visit(
      [](const auto& d) -> double {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, GaussianSpec>) {
          return d.mean;
        } else if constexpr (std::is_same_v<T, UniformSpec>) {
          return 0.5 * (d.lo + d.hi);
        } else if constexpr (std::is_same_v<T, MixtureSpec>) {
          double m = 0.0;
          for (const auto& c : d.components) m += c.weight * c.component.mean;
          return m;
        } else if constexpr (std::is_same_v<T, DiracSpec>) {
          return d.point;
        } else {
          double m = 0.0;
          for (double s : d.samples) m += s;
          return m / static_cast<double>(d.samples.size());
        }
      },
      v_);
}

double Distribution::variance() const {
  return std::visit(
      [this](const auto& d) -> double {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, GaussianSpec>) {
          return d.stddev * d.stddev;
        } else if constexpr (std::is_same_v<T, UniformSpec>) {
          const double w = d.hi - d.lo;
          return w * w / 12.0;
        } else if constexpr (std::is_same_v<T, MixtureSpec>) {
          const double m = mean();
          double second = 0.0;
          for (const auto& c : d.components) {
            second += c.weight * (c.component.stddev * c.component.stddev +
                                  c.component.mean * c.component.mean);
          }
          return second - m * m;
        } else if constexpr (std::is_same_v<T, DiracSpec>) {
          return 0.0;
        } else {
          const double m = mean();
          double acc = 0.0;
          for (double s : d.samples) acc += (s - m) * (s - m);
          return acc / static_cast<double>(d.samples.size());
        }
      },
      v_);
}

double Distribution::third_central_moment() const {
  return std::visit(
      [this](const auto& d) -> double {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, GaussianSpec> ||
                      std::is_same_v<T, UniformSpec> ||
                      std::is_same_v<T, DiracSpec>) {
          return 0.0;  // symmetric about the mean
        } else if constexpr (std::is_same_v<T, MixtureSpec>) {
          const double m = mean();
          double acc = 0.0;
          for (const auto& c : d.components) {
            const double dm = c.component.mean - m;
            const double v = c.component.stddev * c.component.stddev;
            acc += c.weight * (dm * dm * dm + 3.0 * dm * v);
          }
          return acc;
        } else {
          const double m = mean();
          double acc = 0.0;
          for (double s : d.samples) acc += (s - m) * (s - m) * (s - m);
          return acc / static_cast<double>(d.samples.size());
        }
      },
      v_);
}

double Distribution::cdf(double x) const {
  return std::visit(
      [x](const auto& d) -> double {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, GaussianSpec>) {
          return gaussian_cdf(x, d);
        } else if constexpr (std::is_same_v<T, UniformSpec>) {
          return std::clamp((x - d.lo) / (d.hi - d.lo), 0.0, 1.0);
        } else if constexpr (std::is_same_v<T, MixtureSpec>) {
          double f = 0.0;
          for (const auto& c : d.components) f += c.weight * gaussian_cdf(x, c.component);
          return f;
        } else if constexpr (std::is_same_v<T, DiracSpec>) {
          return x >= d.point ? 1.0 : 0.0;
        } else {
          const auto it = std::upper_bound(d.samples.begin(), d.samples.end(), x);
          return static_cast<double>(it - d.samples.begin()) /
                 static_cast<double>(d.samples.size());
        }
      },
      v_);
}

double Distribution::point_mass(double x) const {
  return std::visit(
      [x](const auto& d) -> double {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, DiracSpec>) {
          return x == d.point ? 1.0 : 0.0;
        } else if constexpr (std::is_same_v<T, EmpiricalSpec>) {
          const auto [lo, hi] = std::equal_range(d.samples.begin(), d.samples.end(), x);
          return static_cast<double>(hi - lo) / static_cast<double>(d.samples.size());
        } else {
          return 0.0;
        }
      },
      v_);
}

std::complex<double> Distribution::char_fn(double xi) const {
  if (xi == 0.0) return {1.0, 0.0};
  return std::visit(
      [xi](const auto& d) -> std::complex<double> {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, GaussianSpec>) {
          return gaussian_char(xi, d);
        } else if constexpr (std::is_same_v<T, UniformSpec>) {
          const double center = 0.5 * (d.lo + d.hi);
          const double half = 0.5 * (d.hi - d.lo);
          return std::exp(std::complex<double>(0.0, xi * center)) * sinc(half * xi);
        } else if constexpr (std::is_same_v<T, MixtureSpec>) {
          std::complex<double> acc{0.0, 0.0};
          for (const auto& c : d.components) acc += c.weight * gaussian_char(xi, c.component);
          return acc;
        } else if constexpr (std::is_same_v<T, DiracSpec>) {
          return std::exp(std::complex<double>(0.0, xi * d.point));
        } else {
          std::complex<double> acc{0.0, 0.0};
          for (double s : d.samples) acc += std::exp(std::complex<double>(0.0, xi * s));
          return acc / static_cast<double>(d.samples.size());
        }
      },
      v_);
}

double Distribution::sample_one(RngStream& rng) const {
  return std::visit(
      [&rng](const auto& d) -> double {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, GaussianSpec>) {
          return d.mean + d.stddev * rng.normal();
        } else if constexpr (std::is_same_v<T, UniformSpec>) {
          return d.lo + (d.hi - d.lo) * rng.uniform01();
        } else if constexpr (std::is_same_v<T, MixtureSpec>) {
          const double u = rng.uniform01();
          double cum = 0.0;
          for (const auto& c : d.components) {
            cum += c.weight;
            if (u < cum) return c.component.mean + c.component.stddev * rng.normal();
          }
          const auto& last = d.components.back().component;
          return last.mean + last.stddev * rng.normal();
        } else if constexpr (std::is_same_v<T, DiracSpec>) {
          return d.point;
        } else {
          const auto n = d.samples.size();
          auto idx = static_cast<std::size_t>(rng.uniform01() * static_cast<double>(n));
          if (idx >= n) idx = n - 1;
          return d.samples[idx];
        }
      },
      v_);
}

std::vector<double> Distribution::sample(std::size_t n, RngStream& rng) const {
  std::vector<double> out(n);
  for (auto& x : out) x = sample_one(rng);
  return out;
}

std::string Distribution::describe() const {
  char buf[128];
  return std::visit(
      [&buf](const auto& d) -> std::string {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, GaussianSpec>) {
          std::snprintf(buf, sizeof(buf), "gaussian(mean=%g, std=%g)", d.mean, d.stddev);
          return buf;
        } else if constexpr (std::is_same_v<T, UniformSpec>) {
          std::snprintf(buf, sizeof(buf), "uniform(lo=%g, hi=%g)", d.lo, d.hi);
          return buf;
        } else if constexpr (std::is_same_v<T, MixtureSpec>) {
          std::string s = "mixture(";
          for (std::size_t i = 0; i < d.components.size(); ++i) {
            const auto& c = d.components[i];
            std::snprintf(buf, sizeof(buf), "%s%g*gaussian(%g, %g)", i ? ", " : "",
                          c.weight, c.component.mean, c.component.stddev);
            s += buf;
          }
          return s + ")";
        } else if constexpr (std::is_same_v<T, DiracSpec>) {
          std::snprintf(buf, sizeof(buf), "dirac(point=%g)", d.point);
          return buf;
        } else {
          std::snprintf(buf, sizeof(buf), "empirical(n=%zu)", d.samples.size());
          return buf;
        }
      },
      v_);
}

Distribution pushforward_affine(const Distribution& d, double a, double b) {
  if (!std::isfinite(a) || !std::isfinite(b))
    throw std::invalid_argument("pushforward: coefficients must be finite");
  if (a == 1.0 && b == 0.0) return d;  // identity, exact
  if (a == 0.0) return Distribution::dirac(b);
  return std::visit(
      [a, b](const auto& spec) -> Distribution {
        using T = std::decay_t<decltype(spec)>;
        if constexpr (std::is_same_v<T, GaussianSpec>) {
          return Distribution::gaussian(a * spec.mean + b, std::abs(a) * spec.stddev);
        } else if constexpr (std::is_same_v<T, UniformSpec>) {
          const double p = a * spec.lo + b;
          const double q = a * spec.hi + b;
          return Distribution::uniform(std::min(p, q), std::max(p, q));
        } else if constexpr (std::is_same_v<T, MixtureSpec>) {
          std::vector<MixtureComponent> comps;
          comps.reserve(spec.components.size());
          for (const auto& c : spec.components) {
            comps.push_back({c.weight,
                             {a * c.component.mean + b, std::abs(a) * c.component.stddev}});
          }
          return Distribution::mixture(std::move(comps));
        } else if constexpr (std::is_same_v<T, DiracSpec>) {
          return Distribution::dirac(a * spec.point + b);
        } else {
          std::vector<double> mapped;
          mapped.reserve(spec.samples.size());
          for (double s : spec.samples) mapped.push_back(a * s + b);
          return Distribution::empirical(std::move(mapped));
        }
      },
      d.value());
}

namespace {

std::vector<MixtureComponent> as_components(const Distribution& d) {
  if (const auto* g = d.as_gaussian()) return {{1.0, *g}};
  return std::get<MixtureSpec>(d.value()).components;
}

bool gaussian_like(const Distribution& d) {
  return std::holds_alternative<GaussianSpec>(d.value()) ||
         std::holds_alternative<MixtureSpec>(d.value());
}

}  // namespace

Distribution convolve(const Distribution& d1, const Distribution& d2,
                      std::size_t fallback_samples) {
  if (fallback_samples == 0)
    throw std::invalid_argument("convolve: fallback sample size must be positive");
  if (const auto* p = std::get_if<DiracSpec>(&d1.value()))
    return pushforward_affine(d2, 1.0, p->point);
  if (const auto* p = std::get_if<DiracSpec>(&d2.value()))
    return pushforward_affine(d1, 1.0, p->point);
  if (gaussian_like(d1) && gaussian_like(d2)) {
    const auto c1 = as_components(d1);
    const auto c2 = as_components(d2);
    if (c1.size() == 1 && c2.size() == 1) {
      return Distribution::gaussian(
          c1[0].component.mean + c2[0].component.mean,
          std::hypot(c1[0].component.stddev, c2[0].component.stddev));
    }
    std::vector<MixtureComponent> comps;
    comps.reserve(c1.size() * c2.size());
    double total = 0.0;
    for (const auto& a : c1) {
      for (const auto& b : c2) {
        comps.push_back({a.weight * b.weight,
                         {a.component.mean + b.component.mean,
                          std::hypot(a.component.stddev, b.component.stddev)}});
        total += comps.back().weight;
      }
    }
    for (auto& c : comps) c.weight /= total;
    return Distribution::mixture(std::move(comps));
  }
  // No closed form: empirical law from pairwise sums of fresh samples.
  RngStream rng(kConvolveSeed);
  std::vector<double> xs = d1.sample(fallback_samples, rng);
  std::vector<double> ys = d2.sample(fallback_samples, rng);
  for (std::size_t i = 0; i < fallback_samples; ++i) xs[i] += ys[i];
  return Distribution::empirical(std::move(xs));
}

}  // namespace oploop
