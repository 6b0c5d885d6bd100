#include <cmath>
#include <cstdint>
#include <vector>

#include "doctest.h"
#include "strm/errors.hpp"
#include "strm/grid.hpp"
#include "strm/rng.hpp"
#include "strm/stats.hpp"

using strm::Stream;

namespace {

// Number of marked cells whose particle count is zero (containment breaks).
uint64_t containment_breaks(const strm::CoupledLevel& level) {
  uint64_t bad = 0;
  for (strm::u128 path : level.fractal.occupied)
    if (level.strm.count_at(path) == 0) ++bad;
  return bad;
}

uint64_t domination_breaks(const strm::GenerationState& lower,
                           const strm::GenerationState& upper) {
  uint64_t bad = 0;
  for (const auto& cell : lower.cells)
    if (cell.count > upper.count_at(cell.path)) ++bad;
  return bad;
}

}  // namespace

TEST_SUITE("coupling") {

TEST_CASE("marked cells always hold at least one particle") {
  Stream base = Stream::root(61).fork(strm::tag::kCoupling);
  uint64_t bad = 0;
  for (int r = 0; r < 200; ++r) {
    auto run = strm::coupled_run(2, 2, 1.0, 8, base.fork(r));
    for (const auto& level : run) bad += containment_breaks(level);
  }
  CHECK(bad == 0);
}

TEST_CASE("mark marginal is percolation with retention 1 - e^-c") {
  // Level 1 from the root: 4 child slots, each marked independently with
  // probability 1 - e^-c.
  Stream base = Stream::root(62).fork(strm::tag::kCoupling);
  const double c = 1.0;
  const double ret = 1.0 - std::exp(-c);
  std::vector<uint64_t> counts(5, 0);
  for (int r = 0; r < 3000; ++r) {
    auto run = strm::coupled_run(2, 2, c, 1, base.fork(r));
    ++counts[run[1].fractal.occupied.size()];
  }
  std::vector<double> probs(5, 0.0);
  for (int k = 0; k <= 4; ++k) {
    double binom = 1.0;
    for (int i = 0; i < k; ++i) binom *= (4.0 - i) / (i + 1.0);
    probs[static_cast<size_t>(k)] =
        binom * std::pow(ret, k) * std::pow(1.0 - ret, 4 - k);
  }
  auto rep = strm::chi2_goodness_of_fit(counts, probs);
  CHECK(rep.p_value > 1e-5);
}

TEST_CASE("particle marginal is Poisson at rate c per child slot") {
  Stream base = Stream::root(63).fork(strm::tag::kCoupling);
  std::vector<uint64_t> counts(21, 0);
  std::vector<double> probs(21, 0.0);
  probs[0] = std::exp(-4.0);
  for (size_t k = 1; k < 21; ++k)
    probs[k] = probs[k - 1] * 4.0 / static_cast<double>(k);
  for (int r = 0; r < 3000; ++r) {
    auto run = strm::coupled_run(2, 2, 1.0, 1, base.fork(r));
    ++counts[std::min<uint64_t>(run[1].strm.total, 20)];
  }
  auto rep = strm::chi2_goodness_of_fit(counts, probs);
  CHECK(rep.p_value > 1e-5);
}

TEST_CASE("ordered retention rates give pathwise dominated runs") {
  Stream base = Stream::root(64).fork(strm::tag::kCoupling);
  uint64_t bad = 0;
  for (int r = 0; r < 200; ++r) {
    auto run = strm::monotone_coupled_run(2, 2, 0.6, 1.0, 8, base.fork(r));
    for (const auto& [lower, upper] : run) {
      bad += domination_breaks(lower, upper);
      CHECK(lower.total <= upper.total);
    }
  }
  CHECK(bad == 0);
}

TEST_CASE("equal rates give bit-identical twins") {
  Stream base = Stream::root(65).fork(strm::tag::kCoupling);
  for (int r = 0; r < 30; ++r) {
    auto run = strm::monotone_coupled_run(2, 2, 0.8, 0.8, 10, base.fork(r));
    for (const auto& [lower, upper] : run) {
      REQUIRE(lower.total == upper.total);
      REQUIRE(lower.cells.size() == upper.cells.size());
      for (size_t i = 0; i < lower.cells.size(); ++i) {
        REQUIRE(lower.cells[i].path == upper.cells[i].path);
        REQUIRE(lower.cells[i].count == upper.cells[i].count);
      }
    }
  }
}

TEST_CASE("lower marginal of the ordered pair is Poisson at its own rate") {
  Stream base = Stream::root(66).fork(strm::tag::kCoupling);
  std::vector<uint64_t> counts(16, 0);
  std::vector<double> probs(16, 0.0);
  probs[0] = std::exp(-2.4);
  for (size_t k = 1; k < 16; ++k)
    probs[k] = probs[k - 1] * 2.4 / static_cast<double>(k);
  for (int r = 0; r < 3000; ++r) {
    auto run = strm::monotone_coupled_run(2, 2, 0.6, 1.0, 1, base.fork(r));
    ++counts[std::min<uint64_t>(run[1].first.total, 15)];
  }
  auto rep = strm::chi2_goodness_of_fit(counts, probs);
  CHECK(rep.p_value > 1e-5);
}

TEST_CASE("degenerate or misordered rates are rejected") {
  Stream rs = Stream::root(67).fork(strm::tag::kCoupling).fork(0);
  CHECK_THROWS_AS(strm::coupled_run(2, 2, 0.25, 4, rs), strm::ConfigError);
  CHECK_THROWS_AS(strm::monotone_coupled_run(2, 2, 1.0, 0.6, 4, rs),
                  strm::ConfigError);
}

}  // TEST_SUITE
