#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "strm/rng.hpp"
#include "strm/stats.hpp"

namespace strm {

// A joint draw of k sibling displacements with the branch-time dependence
// structure of the continuum limit: k correlated Brownian lineages on
// [0, 1-1/mu] that split at the sampled branch times, endpoint vectors
// scaled by sqrt(mu).  Each marginal is exactly N(0, (mu-1) I); the output
// order is uniformly permuted, making the family exchangeable.
struct QkSample {
  uint64_t k = 0;
  int d = 1;
  std::vector<std::vector<double>> points;  // k vectors in R^d
  std::vector<double> branch_times;         // sorted, k-1 values
};

// k-1 i.i.d. branch times with density (1-v)^-2 / (mu-1) on [0, 1-1/mu],
// drawn by inverse CDF v = 1 - 1/(1 + (mu-1) u), returned sorted.  k = 1
// yields an empty list; k >= 2 requires mu > 1.
std::vector<double> sample_branch_times(uint64_t k, double mu, Stream& s);

QkSample sample_qk(uint64_t k, double mu, int d, Stream& s);

// One generation of the free-displacement point process: every particle of
// generation n carries weight mu^-n.
struct PointCloudGeneration {
  int generation = 0;
  int d = 1;
  double weight = 1.0;
  std::vector<double> positions;  // row-major, count() * d

  uint64_t count() const {
    return positions.size() / static_cast<size_t>(d);
  }
};

// Free-mode run: offspring geometric with mean mu (support >= 1, so the
// population never dies), each parent's k children displaced by
// rho^n * point_i with rho = mu^-1/2 and a fresh QkSample.  A uniformly
// chosen generation-n particle's position therefore has variance
// (mu-1) * sum_{m<=n} mu^-m -> 1 per coordinate.  Raises ResourceLimitError
// past `cap` particles in a generation.
std::vector<PointCloudGeneration> strm_free_run(double mu, int d,
                                                int generations,
                                                const Stream& run_stream,
                                                uint64_t cap = 10000000);

// Chi-squared fit of offspring samples against P(Z=k) = (1/mu)(1-1/mu)^(k-1),
// k >= 1, tail bins pooled.  Fewer than 10^4 samples sets low_power.
Chi2Report validate_offspring_geometric(const std::vector<uint64_t>& samples,
                                        double mu);

// CSV rows: gen,x_1..x_d,weight.
void export_csv(std::ostream& os, const PointCloudGeneration& cloud,
                bool header = true);

}  // namespace strm
