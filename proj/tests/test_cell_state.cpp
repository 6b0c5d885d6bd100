#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "strm/cell.hpp"
#include "strm/rng.hpp"
#include "strm/state.hpp"

using strm::u128;

TEST_SUITE("cell_state") {

TEST_CASE("child and prefix are inverse walks") {
  CHECK(strm::path_child(5, 4, 3) == 23);
  CHECK(strm::path_prefix(23, 4, 1) == 5);
  CHECK(strm::path_prefix(23, 4, 0) == 23);
  CHECK(strm::path_prefix(23, 4, 2) == 1);
}

TEST_CASE("paths survive beyond 64 bits") {
  // 40 levels of digit 7 at B^d = 8: path = 8^40 - 1, about 2^120.
  u128 p = 0;
  for (int i = 0; i < 40; ++i) p = strm::path_child(p, 8, 7);
  CHECK(p > u128(~uint64_t{0}));
  CHECK(strm::path_prefix(p, 8, 40) == 0);
  CHECK(strm::path_prefix(p, 8, 39) == 7);
  CHECK(strm::u128_to_string(u128(1) << 100) ==
        "1267650600228229401496703205376");
  CHECK(strm::u128_to_string(0) == "0");
}

TEST_CASE("deepest packable level matches the 128-bit budget") {
  // Largest L with (B^d)^L representable in 128 bits ((B^d)^(L+1) would
  // overflow): 2^127 fits, 2^128 does not.
  CHECK(strm::max_packed_level(2) == 127);
  CHECK(strm::max_packed_level(4) == 63);
  CHECK(strm::max_packed_level(8) == 42);
  CHECK(strm::max_packed_level(16) == 31);
}

TEST_CASE("coordinate decoding round-trips") {
  strm::Stream s = strm::Stream::root(31).fork(strm::tag::kStats);
  for (int rep = 0; rep < 20; ++rep) {
    u128 p = 0;
    for (int lvl = 0; lvl < 10; ++lvl) p = strm::path_child(p, 8, s.below(8));
    auto coords = strm::path_coords(p, 10, 2, 3);
    REQUIRE(coords.size() == 3);
    for (uint64_t c : coords) REQUIRE(c < 1024);
    CHECK(strm::path_from_coords(coords, 10, 2, 3) == p);
  }
}

TEST_CASE("known coordinate decode in the plane") {
  // Level 2, B = 2, d = 2: digits (1,0) then (0,1) pack to path 1*4 + 2 = 6;
  // coordinates are digit-weighted by B^(level-1-k).
  auto coords = strm::path_coords(6, 2, 2, 2);
  REQUIRE(coords.size() == 2);
  CHECK(coords[0] == 2);
  CHECK(coords[1] == 1);
}

TEST_CASE("count lookup on a sparse level") {
  strm::GenerationState state;
  state.level = 3;
  state.cells = {{3, 2}, {7, 1}};
  state.total = 3;
  CHECK(state.count_at(3) == 2);
  CHECK(state.count_at(7) == 1);
  CHECK(state.count_at(5) == 0);
  CHECK_FALSE(state.extinct());
  CHECK(strm::GenerationState{}.extinct());
}

TEST_CASE("fractal membership lookup") {
  strm::FractalState state;
  state.level = 2;
  state.occupied = {1, 6, 9};
  CHECK(state.contains(6));
  CHECK_FALSE(state.contains(7));
}

TEST_CASE("csv export lists coordinates and counts") {
  strm::GenerationState state;
  state.level = 1;
  state.cells = {{0, 1}, {3, 2}};
  state.total = 3;
  std::ostringstream os;
  strm::export_csv(os, state, 2, 2);
  CHECK(os.str() ==
        "level,coord_1,coord_2,count\n"
        "1,0,0,1\n"
        "1,1,1,2\n");

  strm::FractalState f;
  f.level = 1;
  f.occupied = {2};
  std::ostringstream fo;
  strm::export_csv(fo, f, 2, 2, false);
  CHECK(fo.str() == "1,0,1,1\n");
}

TEST_CASE("initial states are the unit cell") {
  auto s = strm::initial_state();
  CHECK(s.level == 0);
  CHECK(s.total == 1);
  REQUIRE(s.cells.size() == 1);
  CHECK(s.cells[0].path == u128(0));
  CHECK(s.cells[0].count == 1);
  auto f = strm::initial_fractal();
  CHECK(f.level == 0);
  REQUIRE(f.occupied.size() == 1);
  CHECK(f.occupied[0] == u128(0));
}

}  // TEST_SUITE
