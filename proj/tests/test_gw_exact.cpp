#include <cmath>

#include "doctest.h"
#include "strm/errors.hpp"
#include "strm/gw_exact.hpp"
#include "strm/laws.hpp"

using strm::OffspringLaw;

TEST_SUITE("gw_exact") {

TEST_CASE("extinction probabilities of the parent laws") {
  CHECK(std::fabs(strm::extinction_prob(OffspringLaw::poisson(4.0)) -
                  0.019827401281778414) < 1e-14);
  CHECK(std::fabs(1.0 -
                  strm::extinction_prob(OffspringLaw::binomial(4, 0.5)) -
                  0.91262197461584728) < 1e-14);
  CHECK_THROWS_AS(strm::extinction_prob(OffspringLaw::poisson(0.9)),
                  strm::RegimeError);
}

TEST_CASE("critical thinned chain survival, shallow pins") {
  // Poisson(4) thinned at p = 1/4: the chain is Poisson(1), s_{m+1} = 1-e^-s.
  auto curve = strm::survival_curve(OffspringLaw::poisson(4.0), 0.25, 12);
  REQUIRE(curve.survival.size() == 13);
  CHECK(curve.survival[0] == 1.0);
  const double pins[] = {0.632120558829, 0.468536394613, 0.374082305283,
                         0.312079709975, 0.268076815676, 0.235150973549,
                         0.209548496649, 0.189049689893};
  for (int m = 1; m <= 8; ++m)
    CHECK(std::fabs(curve.survival[static_cast<size_t>(m)] - pins[m - 1]) <
          1e-9);
  CHECK(std::fabs(curve.survival[10] - 0.158235188407) < 1e-9);
  CHECK(std::fabs(curve.survival[12] - 0.136145571572) < 1e-9);
  for (size_t m = 1; m < curve.survival.size(); ++m)
    CHECK(curve.survival[m] < curve.survival[m - 1]);
  CHECK(std::fabs(curve.mean_r - 1.0) < 1e-14);
  CHECK(std::fabs(curve.var_r - 1.0) < 1e-14);
}

TEST_CASE("critical chain deep survival and hitting") {
  auto curve = strm::hitting_curve(OffspringLaw::poisson(4.0), 0.25, 1000);
  CHECK(std::fabs(1000.0 * curve.survival[1000] - 1.991829233) < 1e-6);
  REQUIRE(curve.hitting.size() == 1001);
  CHECK(std::fabs(1000.0 * curve.hitting[1000] - 1.9917634) < 1e-5);
  CHECK(std::fabs(curve.hitting[1000] / curve.survival[1000] - 0.99996694) <
        1e-7);
  CHECK_FALSE(curve.underflow_flagged);
}

TEST_CASE("subcritical chain decays at rate ln E[R]") {
  // Poisson(4) thinned at p = 1/8: chain mean 1/2.
  auto curve = strm::survival_curve(OffspringLaw::poisson(4.0), 0.125, 80);
  CHECK(std::fabs(curve.survival[8] - 0.00256296359774) < 1e-13);
  CHECK(std::fabs(curve.survival[12] - 1.59992981946e-4) < 1e-14);
  CHECK(std::fabs(curve.survival[40] / std::pow(0.5, 40.0) -
                  0.655278833579) < 1e-9);
  auto rep = strm::asymptotic_report(curve);
  CHECK(rep.regime == "subcritical");
  REQUIRE(rep.fit_done);
  CHECK(std::fabs(rep.decay_rate_est - std::log(0.5)) < 1e-12);
}

TEST_CASE("subcritical hitting over survival stabilizes") {
  auto curve = strm::hitting_curve(OffspringLaw::poisson(4.0), 0.125, 40);
  CHECK(std::fabs(curve.hitting[40] / curve.survival[40] - 0.987229498519) <
        1e-9);
}

TEST_CASE("critical tail constant: exact variance vs nominal") {
  auto curve = strm::survival_curve(OffspringLaw::poisson(4.0), 0.25, 1000);
  auto rep = strm::asymptotic_report(curve);
  CHECK(rep.regime == "critical");
  REQUIRE(rep.fit_done);
  // Var(R) = 1 exactly, so the exact constant is 2; the nominal constant
  // 2 mu/(mu-1) = 8/3 ignores the parent-variance term and must differ.
  CHECK(std::fabs(rep.kolmogorov_constant_exact - 2.0) < 1e-12);
  CHECK(std::fabs(rep.kolmogorov_constant_nominal - 8.0 / 3.0) < 1e-12);
  CHECK(rep.kolmogorov_constant_est > 1.9);
  CHECK(rep.kolmogorov_constant_est < 2.0);
  CHECK_FALSE(rep.variance_note.empty());
}

TEST_CASE("deterministic parent: exact and nominal constants coincide") {
  // Deterministic(4) at p = 1/4: Var(Z) = 0, Var(R) = 3/4, both constants 8/3.
  auto curve = strm::survival_curve(OffspringLaw::deterministic(4), 0.25, 1000);
  auto rep = strm::asymptotic_report(curve);
  CHECK(rep.regime == "critical");
  CHECK(std::fabs(rep.kolmogorov_constant_exact - 8.0 / 3.0) < 1e-12);
  CHECK(std::fabs(rep.kolmogorov_constant_nominal - 8.0 / 3.0) < 1e-12);
  CHECK(std::fabs(1000.0 * curve.survival[1000] - 2.6506861) < 1e-6);
  CHECK(rep.kolmogorov_constant_est > 2.62);
  CHECK(rep.kolmogorov_constant_est < 2.67);
}

TEST_CASE("composition consistency: survival iteration vs plain pgf") {
  auto law = OffspringLaw::poisson(4.0);
  auto curve = strm::survival_curve(law, 0.25, 12);
  for (int m : {1, 5, 10}) {
    const double via_pgf = 1.0 - strm::iterate_thinned_pgf(law, 0.25, 0.0, m);
    CHECK(std::fabs(via_pgf - curve.survival[static_cast<size_t>(m)]) <
          1e-12);
  }
}

TEST_CASE("deep subcritical iteration flags underflow instead of lying") {
  auto curve = strm::survival_curve(OffspringLaw::poisson(4.0), 0.125, 2200);
  CHECK(curve.underflow_flagged);
  CHECK(curve.survival[2200] == 0.0);
}

TEST_CASE("thinning p outside (0,1] is rejected") {
  CHECK_THROWS_AS(strm::survival_curve(OffspringLaw::poisson(4.0), 0.0, 10),
                  strm::ConfigError);
  CHECK_THROWS_AS(strm::survival_curve(OffspringLaw::poisson(4.0), 1.5, 10),
                  strm::ConfigError);
}

TEST_CASE("asymptotic report needs a long horizon") {
  auto curve = strm::survival_curve(OffspringLaw::poisson(4.0), 0.25, 50);
  CHECK_THROWS_AS(strm::asymptotic_report(curve), strm::ConfigError);
}

}  // TEST_SUITE
