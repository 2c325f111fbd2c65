#pragma once

#include <cstddef>
#include <span>

#include "oploop/distribution.hpp"

namespace oploop {

enum class CouplingMethod { QuantileExact, GelbrichClosedForm };

struct CouplingReport {
  double distance = 0.0;
  int order = 1;  // p in {1,2}
  std::size_t n_left = 0;
  std::size_t n_right = 0;
  CouplingMethod method = CouplingMethod::QuantileExact;
};

// Order-p Wasserstein distance between two empirical laws given as sorted
// samples. Equal sizes reduce to the sorted pairing; unequal sizes use the
// exact integral of |F^-1 - G^-1|^p over the merged quantile partition,
// with breakpoints compared in integer arithmetic so ties are exact.
CouplingReport w_empirical(std::span<const double> xs_sorted,
                           std::span<const double> ys_sorted, int p);

inline double w_distance(std::span<const double> xs_sorted,
                         std::span<const double> ys_sorted, int p) {
  return w_empirical(xs_sorted, ys_sorted, p).distance;
}

// W2 between two Gaussians: sqrt((m1-m2)^2 + (s1-s2)^2).
double w2_gaussian(const Distribution& g1, const Distribution& g2);

}  // namespace oploop
