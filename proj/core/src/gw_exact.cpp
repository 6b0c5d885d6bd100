#include "strm/gw_exact.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "strm/errors.hpp"
#include "strm/stats.hpp"

namespace strm {

double extinction_prob(const OffspringLaw& law) {
  if (!(law.mean() > 1.0))
    throw RegimeError("extinction_prob: law mean <= 1, extinction is certain");
  // phi(s) = pgf(s) - s has phi(0) >= 0, phi(1) = 0, and the smallest root
  // in [0,1) is the extinction probability.  Bracket by bisection on
  // [0, 1 - eps], then polish with Newton.
  const auto phi = [&](double s) { return law.pgf(s) - s; };
  double lo = 0.0;
  if (phi(lo) == 0.0) return 0.0;  // p_0 = 0: q = 0 exactly
  double hi = 1.0 - 1e-9;
  if (phi(hi) > 0.0) {
    // Mean > 1 forces pgf(s) < s just below 1; if the margin is thinner
    // than 1e-9 the chain is so close to critical that q ~ 1 anyway.
    hi = 1.0 - 1e-14;
    if (phi(hi) > 0.0) return 1.0;
  }
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (phi(mid) > 0.0)
      lo = mid;
    else
      hi = mid;
  }
  double q = 0.5 * (lo + hi);
  // Newton polish; derivative by small central difference is accurate
  // enough here and avoids a dedicated pgf' entry point.
  for (int i = 0; i < 60; ++i) {
    const double f = phi(q);
    if (std::fabs(f) < 1e-15) break;
    const double h = 1e-7;
    const double a = std::max(0.0, q - h);
    const double b = std::min(1.0, q + h);
    const double deriv = (phi(b) - phi(a)) / (b - a);
    if (deriv == 0.0) break;
    const double next = q - f / deriv;
    if (!(next >= 0.0 && next <= 1.0)) break;
    q = next;
  }
  if (std::fabs(phi(q)) > 1e-14)
    throw std::logic_error("extinction_prob: residual above 1e-14");
  return q;
}

namespace {

PgfCurve make_curve(const OffspringLaw& law, double p, int horizon) {
  if (horizon < 0 || horizon > 1000000)
    throw ConfigError("pgf curve: horizon must lie in [0, 10^6]");
  if (!(p > 0.0 && p <= 1.0))
    throw ConfigError("pgf curve: thinning p must lie in (0,1]");
  PgfCurve c;
  c.law = law.describe();
  c.thinning_p = p;
  c.horizon = horizon;
  c.mu = law.mean();
  c.mean_r = law.thinned_mean(p);
  c.var_r = law.thinned_variance(p);
  c.q = (law.mean() > 1.0) ? extinction_prob(law) : 1.0;
  return c;
}

// Iterate v <- g_R(v) = g_Z(p v) from v0, recording each value.
std::vector<double> survival_iteration(const OffspringLaw& law, double p,
                                       double v0, int horizon,
                                       bool* underflow) {
  std::vector<double> out;
  out.reserve(static_cast<size_t>(horizon) + 1);
  double v = v0;
  out.push_back(v);
  for (int m = 1; m <= horizon; ++m) {
    v = law.thinned_survival_map(p, v);
    if (v < 1e-300) {
      if (underflow) *underflow = true;
      v = 0.0;
    }
    out.push_back(v);
  }
  return out;
}

}  // namespace

PgfCurve survival_curve(const OffspringLaw& law, double p, int horizon) {
  PgfCurve c = make_curve(law, p, horizon);
  c.survival = survival_iteration(law, p, 1.0, horizon, &c.underflow_flagged);
  return c;
}

PgfCurve hitting_curve(const OffspringLaw& law, double p, int horizon) {
  PgfCurve c = make_curve(law, p, horizon);
  c.survival = survival_iteration(law, p, 1.0, horizon, &c.underflow_flagged);
  // hitting[m] = 1 - f_R^m(q): same iteration started from 1 - q.
  c.hitting = survival_iteration(law, p, 1.0 - c.q, horizon, nullptr);
  return c;
}

AsymptoticReport asymptotic_report(const PgfCurve& curve) {
  if (curve.horizon < 80)
    throw ConfigError("asymptotic_report: need horizon >= 80");
  AsymptoticReport rep;
  const double mean_r = curve.mean_r;
  const double tol = 1e-9;
  rep.regime = (std::fabs(mean_r - 1.0) <= tol)
                   ? "critical"
                   : (mean_r < 1.0 ? "subcritical" : "supercritical");
  rep.kolmogorov_constant_exact = 2.0 / curve.var_r;
  if (curve.mu > 1.0)
    rep.kolmogorov_constant_nominal = 2.0 * curve.mu / (curve.mu - 1.0);
  rep.variance_note =
      "nominal constant drops the p^2 Var(Z) term of Var(R) = p(1-p)mu + "
      "p^2 Var(Z); the exact-variance constant is authoritative here";

  const int m_lo = std::max(1, curve.horizon / 2);
  if (rep.regime == "critical") {
    // m * survival[m] converges like K (1 + O(log m / m)); the tail mean
    // over the last half is the estimator.
    double acc = 0.0;
    int n = 0;
    for (int m = m_lo; m <= curve.horizon; ++m) {
      acc += static_cast<double>(m) * curve.survival[static_cast<size_t>(m)];
      ++n;
    }
    rep.kolmogorov_constant_est = acc / static_cast<double>(n);
    rep.fit_done = true;
  } else if (rep.regime == "subcritical") {
    std::vector<double> xs;
    std::vector<double> ys;
    for (int m = m_lo; m <= curve.horizon; ++m) {
      const double s = curve.survival[static_cast<size_t>(m)];
      if (s <= 0.0) break;  // underflow region excluded from the fit
      xs.push_back(static_cast<double>(m));
      ys.push_back(std::log(s));
    }
    if (xs.size() >= 3) {
      rep.decay_rate_est = ols_trend(xs, ys).slope;
      rep.fit_done = true;
    }
  }
  return rep;
}

double iterate_thinned_pgf(const OffspringLaw& law, double p, double s,
                           int m) {
  double v = s;
  for (int i = 0; i < m; ++i) v = law.thinned_pgf(p, v);
  return v;
}

}  // namespace strm
