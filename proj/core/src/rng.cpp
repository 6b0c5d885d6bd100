#include "strm/rng.hpp"

#include <cmath>

namespace strm {
namespace {

// Hormann's PTRD (transformed rejection with decomposition) for Poisson
// means >= 10.  See W. Hormann, "The transformed rejection method for
// generating Poisson random variables", Insurance Math. Econom. 12 (1993).
uint64_t poisson_ptrd(Stream& s, double lambda) {
  const double smu = std::sqrt(lambda);
  const double b = 0.931 + 2.53 * smu;
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double v_r = 0.9277 - 3.6224 / (b - 2.0);

  for (;;) {
    double u;
    double v = s.uniform();
    if (v <= 0.86 * v_r) {
      u = v / v_r - 0.43;
      return static_cast<uint64_t>(
          std::floor((2.0 * a / (0.5 - std::fabs(u)) + b) * u + lambda + 0.445));
    }
    if (v >= v_r) {
      u = s.uniform() - 0.5;
    } else {
      u = v / v_r - 0.93;
      u = ((u < 0.0) ? -0.5 : 0.5) - u;
      v = s.uniform() * v_r;
    }
    const double us = 0.5 - std::fabs(u);
    if (us < 0.013 && v > us) continue;
    const double k = std::floor((2.0 * a / us + b) * u + lambda + 0.445);
    v = v * inv_alpha / (a / (us * us) + b);
    const double log_sqrt_2pi = 0.91893853320467267;
    if (k >= 10.0) {
      if (std::log(v * smu) <=
          (k + 0.5) * std::log(lambda / k) - lambda - log_sqrt_2pi + k -
              (1.0 / 12.0 - 1.0 / (360.0 * k * k)) / k) {
        return static_cast<uint64_t>(k);
      }
    } else if (k >= 0.0) {
      // lgamma is cheap enough in this cold branch.
      if (std::log(v) <= k * std::log(lambda) - lambda - std::lgamma(k + 1.0)) {
        return static_cast<uint64_t>(k);
      }
    }
  }
}

}  // namespace

uint64_t poisson_draw_small(Stream& s, double lambda, double exp_neg_lambda) {
  (void)lambda;
  uint64_t k = 0;
  double p = s.uniform();
  while (p > exp_neg_lambda) {
    ++k;
    p *= s.uniform();
  }
  return k;
}

uint64_t poisson_draw(Stream& s, double lambda) {
  if (lambda <= 0.0) return 0;
  if (lambda < 10.0) return poisson_draw_small(s, lambda, std::exp(-lambda));
  return poisson_ptrd(s, lambda);
}

uint64_t binomial_draw(Stream& s, uint64_t n, double p) {
  if (n == 0 || p <= 0.0) return 0;
  if (p >= 1.0) return n;
  if (n <= 64) {
    uint64_t k = 0;
    for (uint64_t i = 0; i < n; ++i) k += (s.uniform() < p) ? 1 : 0;
    return k;
  }
  // Inversion through the cdf; adequate for the moderate n used here.
  const double q = 1.0 - p;
  double pmf = std::pow(q, static_cast<double>(n));
  double cdf = pmf;
  const double u = s.uniform();
  uint64_t k = 0;
  while (u > cdf && k < n) {
    ++k;
    pmf *= (static_cast<double>(n - k + 1) / static_cast<double>(k)) * (p / q);
    cdf += pmf;
  }
  return k;
}

}  // namespace strm
