#include <cmath>
#include <cstdint>
#include <vector>

#include "doctest.h"
#include "strm/laws.hpp"
#include "strm/rng.hpp"
#include "strm/stats.hpp"

using strm::OffspringLaw;
using strm::Stream;

TEST_SUITE("laws") {

TEST_CASE("closed-form moments") {
  CHECK(OffspringLaw::poisson(4.0).mean() == doctest::Approx(4.0));
  CHECK(OffspringLaw::poisson(4.0).variance() == doctest::Approx(4.0));
  // Geometric on {1,2,...} with success 1/mu: variance mu^2 - mu.
  CHECK(OffspringLaw::geometric_mean(2.0).mean() == doctest::Approx(2.0));
  CHECK(OffspringLaw::geometric_mean(2.0).variance() == doctest::Approx(2.0));
  CHECK(OffspringLaw::binomial(4, 0.5).mean() == doctest::Approx(2.0));
  CHECK(OffspringLaw::binomial(4, 0.5).variance() == doctest::Approx(1.0));
  CHECK(OffspringLaw::deterministic(3).mean() == doctest::Approx(3.0));
  CHECK(OffspringLaw::deterministic(3).variance() == doctest::Approx(0.0));
  auto table = OffspringLaw::finite_table({0.2, 0.3, 0.5});
  CHECK(table.mean() == doctest::Approx(1.3));
  CHECK(table.variance() == doctest::Approx(0.61));
}

TEST_CASE("pgf values at known points") {
  CHECK(OffspringLaw::poisson(4.0).pgf(0.5) ==
        doctest::Approx(std::exp(-2.0)).epsilon(1e-12));
  CHECK(OffspringLaw::binomial(4, 0.5).pgf(0.5) ==
        doctest::Approx(0.31640625).epsilon(1e-12));
  CHECK(OffspringLaw::geometric_mean(2.0).pgf(0.5) ==
        doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(OffspringLaw::deterministic(3).pgf(0.5) ==
        doctest::Approx(0.125).epsilon(1e-12));
  CHECK(OffspringLaw::finite_table({0.2, 0.3, 0.5}).pgf(0.5) ==
        doctest::Approx(0.475).epsilon(1e-12));
  CHECK_THROWS(OffspringLaw::poisson(4.0).pgf(1.5));
  CHECK_THROWS(OffspringLaw::poisson(4.0).pgf(-0.1));
}

TEST_CASE("survival map agrees with 1 - pgf(1-s) and is cancellation free") {
  for (double s : {0.3, 0.9}) {
    for (const auto& law :
         {OffspringLaw::poisson(4.0), OffspringLaw::binomial(4, 0.5),
          OffspringLaw::geometric_mean(2.0),
          OffspringLaw::finite_table({0.1, 0.4, 0.5})}) {
      CHECK(law.survival_map(s) ==
            doctest::Approx(1.0 - law.pgf(1.0 - s)).epsilon(1e-12));
    }
  }
  // Near zero 1 - pgf(1-s) would lose all digits; the direct form keeps the
  // linearization g(s) ~ mu s.
  const double tiny = 1e-300;
  const double g = OffspringLaw::poisson(4.0).survival_map(tiny);
  CHECK(g == doctest::Approx(4.0 * tiny).epsilon(1e-6));
}

TEST_CASE("thinning formulas") {
  auto law = OffspringLaw::poisson(4.0);
  CHECK(law.thinned_pgf(0.25, 0.5) ==
        doctest::Approx(law.pgf(1.0 - 0.25 + 0.25 * 0.5)).epsilon(1e-14));
  CHECK(law.thinned_mean(0.25) == doctest::Approx(1.0));
  // p(1-p)mu + p^2 Var(Z) = 0.75 + 0.25 at p = 1/4, Poisson(4).
  CHECK(law.thinned_variance(0.25) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(law.thinned_survival_map(0.25, 0.5) ==
        doctest::Approx(1.0 - law.thinned_pgf(0.25, 0.5)).epsilon(1e-12));
}

TEST_CASE("size-biased law has the right first mass and mean") {
  // P(Z* = k) = k P(Z = k) / mu.  GeometricMean(2): P(Z* = 1) = 1/4.
  auto star = OffspringLaw::geometric_mean(2.0).size_biased();
  REQUIRE(star.kind() == strm::LawKind::kFiniteTable);
  REQUIRE(star.table().size() >= 2);
  CHECK(star.table()[1] == doctest::Approx(0.25).epsilon(1e-9));
  // E[Z*] = E[Z^2]/E[Z] = mu + var/mu: Poisson(4) gives 5.
  CHECK(OffspringLaw::poisson(4.0).size_biased().mean() ==
        doctest::Approx(5.0).epsilon(1e-9));
  CHECK(OffspringLaw::deterministic(3).size_biased().kind() ==
        strm::LawKind::kDeterministic);
}

TEST_CASE("sampling matches the pmf") {
  Stream s = Stream::root(21).fork(strm::tag::kStats);
  auto law = OffspringLaw::geometric_mean(2.0);
  std::vector<uint64_t> counts(16, 0);
  std::vector<double> probs(16, 0.0);
  for (size_t k = 1; k < 16; ++k) probs[k] = 0.5 * std::pow(0.5, k - 1.0);
  probs[15] = std::pow(0.5, 14.0);  // tail mass
  for (int i = 0; i < 30000; ++i)
    ++counts[std::min<uint64_t>(law.sample(s), 15)];
  auto rep = strm::chi2_goodness_of_fit(counts, probs);
  CHECK(rep.p_value > 1e-5);
}

TEST_CASE("direct size-biased sampling agrees with the table law") {
  Stream s = Stream::root(22).fork(strm::tag::kStats);
  auto law = OffspringLaw::poisson(4.0);
  auto star = law.size_biased();
  const auto& table = star.table();
  std::vector<uint64_t> counts(table.size(), 0);
  for (int i = 0; i < 30000; ++i) {
    const uint64_t v = strm::sample_size_biased(law, s);
    REQUIRE(v >= 1);
    ++counts[std::min<uint64_t>(v, table.size() - 1)];
  }
  auto rep = strm::chi2_goodness_of_fit(counts, table);
  CHECK(rep.p_value > 1e-5);
}

TEST_CASE("direct size-biased sampling, geometric closed form") {
  Stream s = Stream::root(23).fork(strm::tag::kStats);
  auto law = OffspringLaw::geometric_mean(2.0);
  uint64_t ones = 0;
  const int n = 30000;
  for (int i = 0; i < n; ++i)
    if (strm::sample_size_biased(law, s) == 1) ++ones;
  const double freq = static_cast<double>(ones) / n;
  CHECK(std::fabs(freq - 0.25) < 0.01);
}

TEST_CASE("pgf slope at 1 reproduces the mean for every kind") {
  for (const auto& law :
       {OffspringLaw::poisson(4.0), OffspringLaw::geometric_mean(2.0),
        OffspringLaw::binomial(4, 0.5), OffspringLaw::deterministic(3),
        OffspringLaw::finite_table({0.2, 0.3, 0.5})}) {
    CHECK(strm::pgf_mean_by_difference(law) ==
          doctest::Approx(law.mean()).epsilon(1e-6));
  }
}

TEST_CASE("json round trip") {
  for (const auto& law :
       {OffspringLaw::poisson(4.0), OffspringLaw::geometric_mean(2.0),
        OffspringLaw::binomial(4, 0.5), OffspringLaw::deterministic(3),
        OffspringLaw::finite_table({0.2, 0.3, 0.5})}) {
    auto back = OffspringLaw::from_json_text(law.to_json_text());
    CHECK(back.kind() == law.kind());
    CHECK(back.mean() == doctest::Approx(law.mean()).epsilon(1e-12));
    CHECK(back.variance() == doctest::Approx(law.variance()).epsilon(1e-12));
  }
  CHECK_THROWS(OffspringLaw::from_json_text("{\"kind\":\"zeta\"}"));
  CHECK_THROWS(OffspringLaw::from_json_text("not json"));
}

TEST_CASE("digit index sampling is uniform and decodes consistently") {
  Stream s = Stream::root(24).fork(strm::tag::kStats);
  std::vector<uint64_t> counts(4, 0);
  for (int i = 0; i < 20000; ++i) {
    const uint64_t v = strm::sample_digit_index(2, 2, s);
    REQUIRE(v < 4);
    ++counts[v];
  }
  auto rep = strm::chi2_goodness_of_fit(counts, std::vector<double>(4, 0.25));
  CHECK(rep.p_value > 1e-5);

  for (uint64_t v = 0; v < 8; ++v) {
    auto digits = strm::unpack_digits(v, 3, 2);
    REQUIRE(digits.size() == 3);
    uint64_t packed = 0;
    uint64_t base = 1;
    for (int i = 0; i < 3; ++i) {
      packed += digits[static_cast<size_t>(i)] * base;
      base *= 2;
    }
    CHECK(packed == v);
  }
}

TEST_CASE("distinct site sampling is distinct with uniform marginals") {
  Stream s = Stream::root(25).fork(strm::tag::kStats);
  std::vector<uint64_t> first(4, 0);
  for (int i = 0; i < 20000; ++i) {
    auto sites = strm::sample_distinct_sites(3, 2, 2, s);
    REQUIRE(sites.size() == 3);
    for (uint64_t site : sites) REQUIRE(site < 4);
    REQUIRE(sites[0] != sites[1]);
    REQUIRE(sites[0] != sites[2]);
    REQUIRE(sites[1] != sites[2]);
    ++first[sites[0]];
  }
  auto rep = strm::chi2_goodness_of_fit(first, std::vector<double>(4, 0.25));
  CHECK(rep.p_value > 1e-5);
  // k = B^d returns a permutation of all sites.
  auto all = strm::sample_distinct_sites(4, 2, 2, s);
  std::vector<bool> seen(4, false);
  for (uint64_t site : all) seen[site] = true;
  for (bool b : seen) CHECK(b);
}

}  // TEST_SUITE
