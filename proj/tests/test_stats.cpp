#include <cmath>
#include <cstdint>
#include <vector>

#include "doctest.h"
#include "strm/rng.hpp"
#include "strm/stats.hpp"

using strm::Stream;

TEST_SUITE("stats") {

TEST_CASE("wilson interval endpoints and width") {
  CHECK_FALSE(strm::wilson_interval(0, 0).defined);

  auto zero = strm::wilson_interval(0, 100);
  REQUIRE(zero.defined);
  CHECK(zero.lo == doctest::Approx(0.0));
  CHECK(zero.hi == doctest::Approx(1.96 * 1.96 / (100.0 + 1.96 * 1.96))
                       .epsilon(1e-6));

  auto full = strm::wilson_interval(100, 100);
  CHECK(full.hi == doctest::Approx(1.0));
  CHECK(full.lo == doctest::Approx(100.0 / (100.0 + 1.96 * 1.96))
                       .epsilon(1e-6));

  auto half = strm::wilson_interval(50, 100);
  CHECK(std::fabs((half.lo + half.hi) / 2.0 - 0.5) < 1e-12);
  CHECK(std::fabs((half.hi - half.lo) - 0.19222) < 5e-4);

  auto wide = strm::wilson_interval(50, 100, 3.0);
  CHECK(wide.hi - wide.lo > half.hi - half.lo);
}

TEST_CASE("normal cdf pins") {
  CHECK(strm::normal_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(std::fabs(strm::normal_cdf(1.959964) - 0.975) < 1e-6);
  CHECK(std::fabs(strm::normal_cdf(-3.0) - 0.0013499) < 1e-7);
  for (double x : {0.3, 1.7, 2.9})
    CHECK(strm::normal_cdf(x) + strm::normal_cdf(-x) ==
          doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("chi-squared tail pins") {
  CHECK(std::fabs(strm::chi2_pvalue(3.841459, 1) - 0.05) < 1e-5);
  CHECK(strm::chi2_pvalue(0.0, 5) == doctest::Approx(1.0));
  CHECK(strm::chi2_pvalue(100.0, 3) < 1e-15);
  // gamma_q(1, x) = e^-x; gamma_q(1/2, x) = erfc(sqrt(x)).
  CHECK(strm::gamma_q(1.0, 2.0) ==
        doctest::Approx(std::exp(-2.0)).epsilon(1e-10));
  CHECK(std::fabs(strm::gamma_q(0.5, 1.0) - 0.15729920705) < 1e-9);
}

TEST_CASE("goodness of fit accepts the truth and rejects a wrong model") {
  Stream s = Stream::root(101).fork(strm::tag::kStats);
  std::vector<uint64_t> counts(6, 0);
  for (int i = 0; i < 60000; ++i) ++counts[s.below(6)];
  auto good =
      strm::chi2_goodness_of_fit(counts, std::vector<double>(6, 1.0 / 6.0));
  CHECK(good.p_value > 1e-4);
  CHECK(good.samples == 60000);
  CHECK_FALSE(good.low_power);

  std::vector<double> biased = {0.3, 0.14, 0.14, 0.14, 0.14, 0.14};
  auto bad = strm::chi2_goodness_of_fit(counts, biased);
  CHECK(bad.p_value < 1e-8);

  auto empty = strm::chi2_goodness_of_fit({0, 0}, {0.5, 0.5});
  CHECK(empty.low_power);
}

TEST_CASE("sparse tail bins are pooled before the statistic is formed") {
  std::vector<uint64_t> counts = {500, 480, 2, 1, 0};
  std::vector<double> probs = {0.5, 0.495, 0.003, 0.0015, 0.0005};
  auto rep = strm::chi2_goodness_of_fit(counts, probs);
  CHECK(rep.dof < 4);
  CHECK(rep.p_value > 1e-6);
}

TEST_CASE("one-sample KS calibration") {
  Stream s = Stream::root(102).fork(strm::tag::kStats);
  std::vector<double> u(2000);
  for (double& x : u) x = s.uniform();
  auto ok = strm::ks_test(u, [](double x) { return x; });
  CHECK(ok.p_value > 0.01);
  CHECK(ok.n == 2000);
  auto wrong = strm::ks_test(u, [](double x) { return x * x; });
  CHECK(wrong.p_value < 1e-10);

  std::vector<double> e(2000);
  for (double& x : e) x = s.exponential(1.0);
  auto exp_ok = strm::ks_test(e, [](double x) { return 1.0 - std::exp(-x); });
  CHECK(exp_ok.p_value > 0.01);
}

TEST_CASE("two-sample KS calibration") {
  Stream s = Stream::root(103).fork(strm::tag::kStats);
  std::vector<double> a(1000);
  std::vector<double> b(1000);
  std::vector<double> shifted(1000);
  for (int i = 0; i < 1000; ++i) {
    a[static_cast<size_t>(i)] = s.normal();
    b[static_cast<size_t>(i)] = s.normal();
    shifted[static_cast<size_t>(i)] = s.normal() + 0.5;
  }
  CHECK(strm::ks_two_sample(a, b).p_value > 0.01);
  CHECK(strm::ks_two_sample(a, shifted).p_value < 1e-8);
}

TEST_CASE("trend fit recovers an exact line") {
  std::vector<double> x = {1, 2, 3, 4, 5, 6};
  std::vector<double> y;
  for (double v : x) y.push_back(2.0 + 3.0 * v);
  auto fit = strm::ols_trend(x, y);
  CHECK(std::fabs(fit.slope - 3.0) < 1e-12);
  CHECK(std::fabs(fit.intercept - 2.0) < 1e-12);
  CHECK(fit.stderr_slope < 1e-10);
}

TEST_CASE("trend fit on noisy data brackets the truth") {
  Stream s = Stream::root(104).fork(strm::tag::kStats);
  std::vector<double> x;
  std::vector<double> y;
  for (int i = 0; i < 200; ++i) {
    x.push_back(static_cast<double>(i));
    y.push_back(1.0 + 0.05 * i + s.normal());
  }
  auto fit = strm::ols_trend(x, y);
  CHECK(std::fabs(fit.slope - 0.05) < 4.0 * fit.stderr_slope);
  CHECK(fit.p_positive < 1e-6);  // strongly positive slope

  for (double& v : y) v = -v;
  auto down = strm::ols_trend(x, y);
  CHECK(down.p_positive > 1.0 - 1e-6);
}

TEST_CASE("running statistics merge like one pass") {
  Stream s = Stream::root(105).fork(strm::tag::kStats);
  std::vector<double> xs(1000);
  for (double& x : xs) x = s.normal() * 3.0 + 1.0;

  strm::RunningStats direct;
  for (double x : xs) direct.add(x);

  strm::RunningStats sa;
  strm::RunningStats sb;
  strm::RunningStats sc;
  for (size_t i = 0; i < 300; ++i) sa.add(xs[i]);
  for (size_t i = 300; i < 650; ++i) sb.add(xs[i]);
  for (size_t i = 650; i < 1000; ++i) sc.add(xs[i]);
  sa.merge(sb);
  sa.merge(sc);

  CHECK(sa.count() == direct.count());
  CHECK(sa.mean() == doctest::Approx(direct.mean()).epsilon(1e-12));
  CHECK(sa.variance() == doctest::Approx(direct.variance()).epsilon(1e-12));
  CHECK(direct.stderr_mean() ==
        doctest::Approx(direct.stddev() / std::sqrt(1000.0)).epsilon(1e-12));
}

}  // TEST_SUITE
