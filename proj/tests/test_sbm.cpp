#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "doctest.h"
#include "strm/laws.hpp"
#include "strm/rng.hpp"
#include "strm/sbm.hpp"
#include "strm/stats.hpp"

using strm::Stream;

TEST_SUITE("sbm") {

TEST_CASE("branch times are sorted with the right support and median") {
  Stream s = Stream::root(91).fork(strm::tag::kSbm);
  std::vector<double> singles;
  for (int i = 0; i < 20000; ++i) {
    auto times = strm::sample_branch_times(2, 2.0, s);
    REQUIRE(times.size() == 1);
    REQUIRE(times[0] > 0.0);
    REQUIRE(times[0] < 0.5);
    singles.push_back(times[0]);
  }
  // CDF v/((1-v)(mu-1)); at mu = 2 the median solves v/(1-v) = 1/2.
  std::nth_element(singles.begin(), singles.begin() + 10000, singles.end());
  CHECK(std::fabs(singles[10000] - 1.0 / 3.0) < 0.01);

  auto many = strm::sample_branch_times(6, 2.0, s);
  REQUIRE(many.size() == 5);
  CHECK(std::is_sorted(many.begin(), many.end()));
}

TEST_CASE("family marginals are centered normals with variance mu - 1") {
  Stream s = Stream::root(92).fork(strm::tag::kSbm);
  const double mu = 4.0;
  std::vector<double> first_coord;
  strm::RunningStats stats;
  for (int i = 0; i < 20000; ++i) {
    auto sample = strm::sample_qk(2, mu, 2, s);
    REQUIRE(sample.points.size() == 2);
    REQUIRE(sample.points[0].size() == 2);
    const double x = sample.points[0][0];
    first_coord.push_back(x / std::sqrt(mu - 1.0));
    stats.add(x);
  }
  CHECK(std::fabs(stats.mean()) < 0.05);
  CHECK(std::fabs(stats.variance() - 3.0) < 0.15);
  auto ks = strm::ks_test(first_coord,
                          [](double x) { return strm::normal_cdf(x); });
  CHECK(ks.p_value > 1e-3);
}

TEST_CASE("pair covariance matches the single-branch closed form") {
  // For a pair the covariance per coordinate is mu (1 - ln mu / (mu - 1)).
  Stream s = Stream::root(93).fork(strm::tag::kSbm);
  const double mu = 4.0;
  const double exact = mu * (1.0 - std::log(mu) / (mu - 1.0));
  strm::RunningStats prod;
  for (int i = 0; i < 20000; ++i) {
    auto sample = strm::sample_qk(2, mu, 2, s);
    for (int c = 0; c < 2; ++c)
      prod.add(sample.points[0][static_cast<size_t>(c)] *
               sample.points[1][static_cast<size_t>(c)]);
  }
  CHECK(std::fabs(prod.mean() - exact) < 4.0 * prod.stderr_mean());
  CHECK(std::fabs(prod.mean() - 2.151607519) < 0.12);
}

TEST_CASE("points of a family are exchangeable") {
  Stream s = Stream::root(94).fork(strm::tag::kSbm);
  std::vector<double> a;
  std::vector<double> b;
  for (int i = 0; i < 8000; ++i) {
    auto sample = strm::sample_qk(3, 4.0, 1, s);
    a.push_back(sample.points[0][0]);
    b.push_back(sample.points[2][0]);
  }
  auto ks = strm::ks_two_sample(a, b);
  CHECK(ks.p_value > 1e-3);
}

TEST_CASE("free-mode run carries weights mu^-n and never dies") {
  Stream rs = Stream::root(95).fork(strm::tag::kSbm).fork(0);
  const double mu = 1.5;
  auto gens = strm::strm_free_run(mu, 1, 10, rs);
  REQUIRE(gens.size() == 11);
  for (size_t n = 0; n < gens.size(); ++n) {
    CHECK(gens[n].generation == static_cast<int>(n));
    CHECK(gens[n].d == 1);
    REQUIRE(gens[n].count() >= 1);
    CHECK(gens[n].weight ==
          doctest::Approx(std::pow(mu, -static_cast<double>(n)))
              .epsilon(1e-12));
    CHECK(gens[n].positions.size() ==
          gens[n].count() * static_cast<size_t>(gens[n].d));
  }
}

TEST_CASE("a uniformly sampled deep particle is Gaussian with the exact "
          "variance") {
  Stream base = Stream::root(96).fork(strm::tag::kSbm);
  const double mu = 1.5;
  const int G = 10;
  const double exact_var = 1.0 - std::pow(mu, -static_cast<double>(G));
  std::vector<double> standardized;
  strm::RunningStats stats;
  for (int r = 0; r < 3000; ++r) {
    Stream rs = base.fork(static_cast<uint64_t>(r));
    auto gens = strm::strm_free_run(mu, 1, G, rs);
    const auto& last = gens.back();
    Stream pick = base.fork(100000 + static_cast<uint64_t>(r));
    const double x =
        last.positions[pick.below(static_cast<uint64_t>(last.count()))];
    stats.add(x);
    standardized.push_back(x / std::sqrt(exact_var));
  }
  CHECK(std::fabs(stats.mean()) < 0.08);
  CHECK(std::fabs(stats.variance() - exact_var) < 0.09);
  auto ks = strm::ks_test(standardized,
                          [](double x) { return strm::normal_cdf(x); });
  CHECK(ks.p_value > 1e-3);
}

TEST_CASE("geometric offspring validator accepts the truth and rejects a "
          "wrong mean") {
  Stream s = Stream::root(97).fork(strm::tag::kSbm);
  auto law = strm::OffspringLaw::geometric_mean(2.0);
  std::vector<uint64_t> draws;
  draws.reserve(30000);
  for (int i = 0; i < 30000; ++i) draws.push_back(law.sample(s));
  auto good = strm::validate_offspring_geometric(draws, 2.0);
  CHECK(good.p_value > 0.01);
  CHECK_FALSE(good.low_power);
  auto bad = strm::validate_offspring_geometric(draws, 2.3);
  CHECK(bad.p_value < 1e-4);
  std::vector<uint64_t> few(draws.begin(), draws.begin() + 5000);
  CHECK(strm::validate_offspring_geometric(few, 2.0).low_power);
}

}  // TEST_SUITE
