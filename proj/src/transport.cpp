#include "oploop/transport.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace oploop {

CouplingReport w_empirical(std::span<const double> xs,
                           std::span<const double> ys, int p) {
  if (p != 1 && p != 2) throw std::invalid_argument("w_empirical: order must be 1 or 2");
  if (xs.empty() || ys.empty())
    throw std::invalid_argument("w_empirical: empty sample set");
  if (!std::is_sorted(xs.begin(), xs.end()) || !std::is_sorted(ys.begin(), ys.end()))
    throw std::invalid_argument("w_empirical: samples must be sorted ascending");

  const std::size_t n = xs.size();
  const std::size_t m = ys.size();
  // Quantile breakpoints of the two step functions live at i/n and j/m;
  // over a common denominator n*m they are (i*m) and (j*n), so boundary
  // comparisons below are exact.
  const double denom = static_cast<double>(n) * static_cast<double>(m);
  long double cost = 0.0L;  // extended accumulation keeps scaling identities tight
  std::uint64_t prev = 0;
  std::size_t i = 0, j = 0;
  while (i < n && j < m) {
    const std::uint64_t qx = static_cast<std::uint64_t>(i + 1) * m;
    const std::uint64_t qy = static_cast<std::uint64_t>(j + 1) * n;
    const std::uint64_t q = std::min(qx, qy);
    const double w = static_cast<double>(q - prev) / denom;
    const double d = std::abs(xs[i] - ys[j]);
    cost += static_cast<long double>(w) * (p == 1 ? d : d * d);
    prev = q;
    if (qx == q) ++i;
    if (qy == q) ++j;
  }

  CouplingReport report;
  report.distance = (p == 1) ? static_cast<double>(cost)
                             : std::sqrt(static_cast<double>(cost));
  report.order = p;
  report.n_left = n;
  report.n_right = m;
  report.method = CouplingMethod::QuantileExact;
  return report;
}

double w2_gaussian(const Distribution& g1, const Distribution& g2) {
  const auto* a = g1.as_gaussian();
  const auto* b = g2.as_gaussian();
  if (a == nullptr || b == nullptr)
    throw std::invalid_argument("w2_gaussian: closed form requires Gaussians");
  return std::hypot(a->mean - b->mean, a->stddev - b->stddev);
}

}  // namespace oploop
