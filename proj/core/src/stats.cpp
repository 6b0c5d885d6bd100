#include "strm/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace strm {

Interval wilson_interval(uint64_t successes, uint64_t trials, double z) {
  Interval iv;
  if (trials == 0) return iv;
  const double n = static_cast<double>(trials);
  const double phat = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = phat + z2 / (2.0 * n);
  const double half =
      z * std::sqrt(phat * (1.0 - phat) / n + z2 / (4.0 * n * n));
  iv.lo = std::max(0.0, (center - half) / denom);
  iv.hi = std::min(1.0, (center + half) / denom);
  iv.defined = true;
  return iv;
}

void RunningStats::add(double x) {
  ++n_;
  const double delta = x - mean_;
  mean_ += delta / static_cast<double>(n_);
  m2_ += delta * (x - mean_);
}

void RunningStats::merge(const RunningStats& other) {
  if (other.n_ == 0) return;
  if (n_ == 0) {
    *this = other;
    return;
  }
  const double na = static_cast<double>(n_);
  const double nb = static_cast<double>(other.n_);
  const double delta = other.mean_ - mean_;
  const double total = na + nb;
  mean_ += delta * nb / total;
  m2_ += other.m2_ + delta * delta * na * nb / total;
  n_ += other.n_;
}

double RunningStats::variance() const {
  return (n_ > 1) ? m2_ / static_cast<double>(n_ - 1) : 0.0;
}

double RunningStats::stddev() const { return std::sqrt(variance()); }

double RunningStats::stderr_mean() const {
  return (n_ > 0) ? stddev() / std::sqrt(static_cast<double>(n_)) : 0.0;
}

double normal_cdf(double x) {
  return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

namespace {

// Lower regularized incomplete gamma by series (x < a+1).
double gamma_p_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  double ap = a;
  for (int i = 0; i < 1000; ++i) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::fabs(term) < std::fabs(sum) * 1e-16) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Upper regularized incomplete gamma by continued fraction (x >= a+1).
double gamma_q_cf(double a, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 1000; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 1e-16) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace

double gamma_q(double a, double x) {
  if (x < 0.0 || a <= 0.0) throw std::domain_error("gamma_q: bad arguments");
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
  return gamma_q_cf(a, x);
}

double chi2_pvalue(double statistic, int dof) {
  if (dof <= 0) return 1.0;
  if (statistic <= 0.0) return 1.0;
  return gamma_q(0.5 * dof, 0.5 * statistic);
}

Chi2Report chi2_goodness_of_fit(const std::vector<uint64_t>& observed,
                                const std::vector<double>& probs,
                                double min_expected) {
  if (observed.size() != probs.size())
    throw std::domain_error("chi2_goodness_of_fit: size mismatch");
  Chi2Report rep;
  for (uint64_t c : observed) rep.samples += c;
  if (rep.samples == 0) {
    rep.low_power = true;
    return rep;
  }
  const double n = static_cast<double>(rep.samples);

  // Pool right-to-left until every effective bin has expected >= min_expected.
  std::vector<double> exp_bins;
  std::vector<double> obs_bins;
  double exp_acc = 0.0;
  double obs_acc = 0.0;
  for (size_t i = observed.size(); i-- > 0;) {
    exp_acc += n * probs[i];
    obs_acc += static_cast<double>(observed[i]);
    if (exp_acc >= min_expected || i == 0) {
      exp_bins.push_back(exp_acc);
      obs_bins.push_back(obs_acc);
      exp_acc = 0.0;
      obs_acc = 0.0;
    }
  }
  // A leading underweight remainder gets merged into its neighbour.
  if (exp_bins.size() >= 2 && exp_bins.back() < min_expected) {
    exp_bins[exp_bins.size() - 2] += exp_bins.back();
    obs_bins[obs_bins.size() - 2] += obs_bins.back();
    exp_bins.pop_back();
    obs_bins.pop_back();
  }

  double stat = 0.0;
  for (size_t i = 0; i < exp_bins.size(); ++i) {
    if (exp_bins[i] <= 0.0) continue;
    const double diff = obs_bins[i] - exp_bins[i];
    stat += diff * diff / exp_bins[i];
  }
  rep.statistic = stat;
  rep.dof = static_cast<int>(exp_bins.size()) - 1;
  rep.p_value = chi2_pvalue(stat, rep.dof);
  return rep;
}

namespace {

double kolmogorov_pvalue(double lambda) {
  if (lambda < 0.2) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term =
        std::exp(-2.0 * lambda * lambda * static_cast<double>(k) *
                 static_cast<double>(k));
    sum += (k % 2 == 1) ? term : -term;
    if (term < 1e-12) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

}  // namespace

KsResult ks_test(std::vector<double> samples,
                 const std::function<double(double)>& cdf) {
  KsResult r;
  r.n = samples.size();
  if (samples.empty()) return r;
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max(d, std::fabs(f - static_cast<double>(i) / n));
    d = std::max(d, std::fabs(static_cast<double>(i + 1) / n - f));
  }
  r.statistic = d;
  const double sn = std::sqrt(n);
  r.p_value = kolmogorov_pvalue((sn + 0.12 + 0.11 / sn) * d);
  return r;
}

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  KsResult r;
  if (a.empty() || b.empty()) return r;
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  double d = 0.0;
  size_t i = 0;
  size_t j = 0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::fabs(static_cast<double>(i) / na -
                              static_cast<double>(j) / nb));
  }
  const double ne = na * nb / (na + nb);
  r.n = static_cast<uint64_t>(ne);
  r.statistic = d;
  const double sn = std::sqrt(ne);
  r.p_value = kolmogorov_pvalue((sn + 0.12 + 0.11 / sn) * d);
  return r;
}

TrendResult ols_trend(const std::vector<double>& x,
                      const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 3)
    throw std::domain_error("ols_trend: need >= 3 matched points");
  TrendResult t;
  const size_t n = x.size();
  double mx = 0.0;
  double my = 0.0;
  for (size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0;
  double sxy = 0.0;
  for (size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx <= 0.0) throw std::domain_error("ols_trend: degenerate x");
  t.slope = sxy / sxx;
  t.intercept = my - t.slope * mx;
  double ss_res = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double e = y[i] - (t.intercept + t.slope * x[i]);
    ss_res += e * e;
  }
  const double sigma2 = ss_res / static_cast<double>(n - 2);
  t.stderr_slope = std::sqrt(sigma2 / sxx);
  if (t.stderr_slope > 0.0) {
    t.z = t.slope / t.stderr_slope;
    t.p_positive = 1.0 - normal_cdf(t.z);
  } else {
    t.z = (t.slope > 0.0) ? 1e300 : 0.0;
    t.p_positive = (t.slope > 0.0) ? 0.0 : 1.0;
  }
  return t;
}

}  // namespace strm
