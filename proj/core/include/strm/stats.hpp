#pragma once

#include <cstdint>
#include <functional>
#include <vector>

namespace strm {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool defined = false;  // false when trials == 0
};

// Wilson score interval for a binomial proportion.  z = 1.96 gives the usual
// 95% band; the acceptance checks use z = 3 ("3-sigma Wilson band").
Interval wilson_interval(uint64_t successes, uint64_t trials, double z = 1.96);

// Running mean/variance (Welford).  merge() is associative, so replicate
// shards can be combined in any grouping with identical results as long as
// the final merge order is fixed.
class RunningStats {
 public:
  void add(double x);
  void merge(const RunningStats& other);
  uint64_t count() const { return n_; }
  double mean() const { return mean_; }
  double variance() const;  // sample variance (n-1 denominator)
  double stddev() const;
  double stderr_mean() const;  // stddev / sqrt(n)

 private:
  uint64_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

double normal_cdf(double x);

// Regularized incomplete gamma functions; gamma_q(a, x) = Q(a, x).
double gamma_q(double a, double x);
double chi2_pvalue(double statistic, int dof);

struct Chi2Report {
  double statistic = 0.0;
  int dof = 0;
  double p_value = 1.0;
  uint64_t samples = 0;
  bool low_power = false;  // fewer samples than the caller's floor
};

// Goodness of fit of observed counts against expected probabilities.
// Bins with expected count below min_expected are pooled into the tail,
// scanning from the right.  dof = (#effective bins) - 1.
Chi2Report chi2_goodness_of_fit(const std::vector<uint64_t>& observed,
                                const std::vector<double>& probs,
                                double min_expected = 5.0);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
  uint64_t n = 0;
};

// One-sample Kolmogorov-Smirnov against a continuous CDF.  P-value uses the
// Kolmogorov series with Stephens' finite-n correction
// lambda = (sqrt(n) + 0.12 + 0.11/sqrt(n)) * D.
KsResult ks_test(std::vector<double> samples,
                 const std::function<double(double)>& cdf);

// Two-sample KS with the same asymptotic p-value at effective
// n = n1*n2/(n1+n2).
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

struct TrendResult {
  double slope = 0.0;
  double stderr_slope = 0.0;
  double z = 0.0;            // slope / stderr
  double p_positive = 1.0;   // one-sided p for "slope > 0"
  double intercept = 0.0;
};

// Ordinary least squares of y against x with residual-based standard error.
// Used for decay-rate fits and the "no significant positive trend" check.
TrendResult ols_trend(const std::vector<double>& x,
                      const std::vector<double>& y);

}  // namespace strm
