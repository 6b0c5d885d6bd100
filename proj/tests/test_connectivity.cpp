#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "doctest.h"
#include "strm/connectivity.hpp"
#include "strm/errors.hpp"
#include "strm/grid.hpp"
#include "strm/laws.hpp"
#include "strm/params.hpp"
#include "strm/rng.hpp"

using strm::AdjacencyMode;
using strm::CellKey;
using strm::ModelParams;
using strm::OffspringLaw;
using strm::Stream;
using strm::u128;

namespace {

u128 plane_cell(uint64_t x, uint64_t y, int level) {
  return strm::path_from_coords({x, y}, level, 2, 2);
}

}  // namespace

TEST_SUITE("connectivity") {

TEST_CASE("adjacency names round-trip") {
  for (const char* name : {"face", "edge", "closedcube"}) {
    CHECK(strm::adjacency_name(strm::adjacency_from_name(name)) == name);
  }
  CHECK_THROWS_AS(strm::adjacency_from_name("diagonal"), strm::ConfigError);
}

TEST_CASE("pair classification in the plane") {
  const int lvl = 1;
  CellKey a{lvl, plane_cell(0, 0, lvl)};
  CellKey face{lvl, plane_cell(1, 0, lvl)};
  CellKey corner{lvl, plane_cell(1, 1, lvl)};

  auto same = strm::classify_pair(a, a, 2, 2);
  CHECK(same.kind == strm::PairClass::kSame);

  auto f = strm::classify_pair(a, face, 2, 2);
  CHECK(f.kind == strm::PairClass::kNeighbour);
  CHECK(f.ell == 1);

  auto c = strm::classify_pair(a, corner, 2, 2);
  CHECK(c.kind == strm::PairClass::kNeighbour);
  CHECK(c.ell == 0);

  CellKey far{2, plane_cell(2, 0, 2)};
  CellKey origin2{2, plane_cell(0, 0, 2)};
  CHECK(strm::classify_pair(origin2, far, 2, 2).kind ==
        strm::PairClass::kNotAdjacent);

  CHECK_THROWS(strm::classify_pair(a, origin2, 2, 2));
}

TEST_CASE("pair classification distinguishes contact dimension in 3d") {
  const int lvl = 1;
  auto cell = [&](uint64_t x, uint64_t y, uint64_t z) {
    return CellKey{lvl, strm::path_from_coords({x, y, z}, lvl, 2, 3)};
  };
  CHECK(strm::classify_pair(cell(0, 0, 0), cell(1, 0, 0), 2, 3).ell == 2);
  CHECK(strm::classify_pair(cell(0, 0, 0), cell(1, 1, 0), 2, 3).ell == 1);
  CHECK(strm::classify_pair(cell(0, 0, 0), cell(1, 1, 1), 2, 3).ell == 0);
}

TEST_CASE("crossing on a full grid and on an empty one") {
  std::vector<u128> all;
  for (uint64_t x = 0; x < 4; ++x)
    for (uint64_t y = 0; y < 4; ++y) all.push_back(plane_cell(x, y, 2));
  std::sort(all.begin(), all.end());
  auto rep = strm::crossing(all, 2, 2, 2, AdjacencyMode::kFace, 1);
  CHECK(rep.crossed);
  CHECK(rep.component_count == 1);
  CHECK(rep.largest_component == 16);
  CHECK(rep.spanning_cluster_size == 16);

  auto empty = strm::crossing({}, 2, 2, 2, AdjacencyMode::kFace, 1);
  CHECK_FALSE(empty.crossed);
  CHECK(empty.component_count == 0);
}

TEST_CASE("a single column crosses its own axis only") {
  std::vector<u128> column;
  for (uint64_t y = 0; y < 4; ++y) column.push_back(plane_cell(0, y, 2));
  std::sort(column.begin(), column.end());
  auto along = strm::crossing(column, 2, 2, 2, AdjacencyMode::kFace, 2);
  CHECK(along.crossed);
  CHECK(along.spanning_cluster_size == 4);
  auto across = strm::crossing(column, 2, 2, 2, AdjacencyMode::kFace, 1);
  CHECK_FALSE(across.crossed);
  CHECK(across.component_count == 1);
}

TEST_CASE("corner contact counts only for the closed-cube relation") {
  std::vector<u128> diag;
  for (uint64_t i = 0; i < 4; ++i) diag.push_back(plane_cell(i, i, 2));
  std::sort(diag.begin(), diag.end());

  auto face = strm::crossing(diag, 2, 2, 2, AdjacencyMode::kFace, 1);
  CHECK_FALSE(face.crossed);
  CHECK(face.component_count == 4);

  // The lattice relation requires an equal coordinate, which a diagonal
  // step never has in the plane.
  auto edge = strm::crossing(diag, 2, 2, 2, AdjacencyMode::kEdge, 1);
  CHECK_FALSE(edge.crossed);
  CHECK(edge.component_count == 4);

  auto cube = strm::crossing(diag, 2, 2, 2, AdjacencyMode::kClosedCube, 1);
  CHECK(cube.crossed);
  CHECK(cube.component_count == 1);
}

TEST_CASE("on the line the three relations coincide") {
  std::vector<u128> cells;
  for (uint64_t x = 0; x < 4; ++x)
    cells.push_back(strm::path_from_coords({x}, 2, 2, 1));
  std::sort(cells.begin(), cells.end());
  for (auto mode : {AdjacencyMode::kFace, AdjacencyMode::kEdge,
                    AdjacencyMode::kClosedCube}) {
    auto rep = strm::crossing(cells, 2, 2, 1, mode, 1);
    CHECK(rep.crossed);
    CHECK(rep.component_count == 1);
  }
}

TEST_CASE("state overloads agree with the raw cell-set overload") {
  strm::FractalState f;
  f.level = 2;
  for (uint64_t y = 0; y < 4; ++y) f.occupied.push_back(plane_cell(0, y, 2));
  std::sort(f.occupied.begin(), f.occupied.end());
  auto a = strm::crossing(f, 2, 2, AdjacencyMode::kFace, 2);
  auto b = strm::crossing(f.occupied, 2, 2, 2, AdjacencyMode::kFace, 2);
  CHECK(a.crossed == b.crossed);
  CHECK(a.component_count == b.component_count);

  strm::GenerationState g;
  g.level = 2;
  for (uint64_t y = 0; y < 4; ++y) g.cells.push_back({plane_cell(0, y, 2), 2});
  std::sort(g.cells.begin(), g.cells.end(),
            [](const auto& l, const auto& r) { return l.path < r.path; });
  g.total = 8;
  auto c = strm::crossing(g, 2, 2, AdjacencyMode::kFace, 2);
  CHECK(c.crossed == a.crossed);
}

TEST_CASE("streamed separation certifier agrees with the materialized one") {
  auto params = ModelParams::grid(2, 2, OffspringLaw::poisson(2.0));
  Stream base = Stream::root(71).fork(strm::tag::kGrid);
  int found_any = 0;
  for (int r = 0; r < 10; ++r) {
    Stream rs = base.fork(static_cast<uint64_t>(r));
    auto states = strm::run(params, 10, rs);
    auto mat = strm::td_certify(states, 2, 10, 2, 2);
    auto streamed = strm::td_certify_streamed(params, rs, 2, 10);
    CHECK(mat.found == streamed.found);
    CHECK(mat.separation_level == streamed.separation_level);
    CHECK(mat.groups == streamed.groups);
    CHECK_FALSE(streamed.truncated);
    if (mat.found) ++found_any;
  }
  CHECK(found_any > 0);
}

TEST_CASE("a run extinct at the base is vacuously separated there") {
  auto params = ModelParams::grid(2, 2, OffspringLaw::poisson(0.3));
  Stream base = Stream::root(72).fork(strm::tag::kGrid);
  bool saw_extinct = false;
  for (int r = 0; r < 20 && !saw_extinct; ++r) {
    Stream rs = base.fork(static_cast<uint64_t>(r));
    auto states = strm::run(params, 6, rs);
    if (!states[2].extinct()) continue;
    saw_extinct = true;
    auto rep = strm::td_certify(states, 2, 6, 2, 2);
    CHECK(rep.found);
    CHECK(rep.separation_level == 2);
    CHECK(rep.groups == 0);
  }
  CHECK(saw_extinct);
}

TEST_CASE("truncation can suppress but never invent a separation verdict") {
  auto params = ModelParams::grid(2, 2, OffspringLaw::poisson(4.0));
  Stream base = Stream::root(73).fork(strm::tag::kGrid);
  bool saw_truncated = false;
  for (int r = 0; r < 10 && !saw_truncated; ++r) {
    auto rep = strm::td_certify_streamed(params, base.fork(r), 2, 20, 5);
    if (rep.truncated) {
      saw_truncated = true;
      CHECK_FALSE(rep.found);
    }
  }
  CHECK(saw_truncated);
}

TEST_CASE("support statistics implement the covering sum") {
  auto params = ModelParams::grid(2, 2, OffspringLaw::poisson(4.0));
  strm::GenerationState g;
  g.level = 3;
  for (uint64_t i = 0; i < 5; ++i) g.cells.push_back({i, 1});
  g.total = 5;
  auto stats = strm::support_stats(g, params);
  CHECK(stats.occupied_count == 5);
  CHECK(stats.level == 3);
  // 5 * (sqrt(2) 2^-3)^2 * 3 ln 2 = 5 * 0.03125 * 3 ln 2.
  CHECK(stats.h_statistic ==
        doctest::Approx(5.0 * 0.03125 * 3.0 * std::log(2.0)).epsilon(1e-12));
  CHECK(stats.ln_occupied == doctest::Approx(std::log(5.0)).epsilon(1e-12));
}

TEST_CASE("exact ball-hit recursion reproduces frozen values") {
  auto critical = ModelParams::grid(2, 2, OffspringLaw::poisson(4.0));
  const std::vector<double> y2 = {0.5, 0.5};
  CHECK(std::fabs(strm::ball_hit_exact(critical, y2, 0.125, 8) - 0.885455) <
        5e-6);
  CHECK(std::fabs(strm::ball_hit_exact(critical, y2, 0.0625, 9) - 0.812309) <
        5e-6);

  auto subcritical = ModelParams::grid(2, 3, OffspringLaw::poisson(4.0));
  const std::vector<double> y3 = {0.5, 0.5, 0.5};
  const double p4 = strm::ball_hit_exact(subcritical, y3, 0.0625, 10);
  const double p5 = strm::ball_hit_exact(subcritical, y3, 0.03125, 11);
  CHECK(std::fabs(p4 - 0.2893038) < 5e-7);
  CHECK(std::fabs(p5 - 0.1539373) < 5e-7);
  // Successive radius halvings approach the scaling ratio 2 from below.
  CHECK(p4 / p5 == doctest::Approx(1.8794).epsilon(1e-3));
}

TEST_CASE("monte carlo ball hits bracket the exact value") {
  auto params = ModelParams::grid(2, 2, OffspringLaw::poisson(4.0));
  const std::vector<double> y = {0.5, 0.5};
  const double exact = strm::ball_hit_exact(params, y, 0.125, 8);
  Stream base = Stream::root(74).fork(strm::tag::kGrid);
  auto est = strm::ball_hit_estimate(params, y, 0.125, 8, 400, base);
  REQUIRE(est.replicates == 400);
  REQUIRE(est.interval.defined);
  CHECK(est.interval.lo <= exact);
  CHECK(exact <= est.interval.hi);
}

TEST_CASE("ball-hit preconditions are enforced") {
  auto params = ModelParams::grid(2, 2, OffspringLaw::poisson(4.0));
  const std::vector<double> y = {0.5, 0.5};
  CHECK_THROWS_AS(strm::ball_hit_exact(params, y, 0.75, 8),
                  strm::ConfigError);
  // Grid too coarse: B^-level > r/4.
  CHECK_THROWS_AS(strm::ball_hit_exact(params, y, 0.125, 3),
                  strm::ConfigError);
}

}  // TEST_SUITE
