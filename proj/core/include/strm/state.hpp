#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "strm/cell.hpp"

namespace strm {

struct CellCount {
  u128 path = 0;
  uint64_t count = 0;
};

// Sparse occupancy of one grid level: the process N_m^x.  Cells are kept
// sorted by path; total is maintained exactly.  The level-m measure weight
// of a cell is mu^-m * count.  An empty cell list is genuine extinction
// (absorbing under step), not an error.
struct GenerationState {
  int level = 0;
  std::vector<CellCount> cells;  // sorted by path, counts > 0
  uint64_t total = 0;

  bool extinct() const { return cells.empty(); }
  // Count at a path, 0 if absent (binary search).
  uint64_t count_at(u128 path) const;
};

// Sparse occupied set of one fractal percolation level (cells with
// indicator 1).  Occupancy at level m+1 is only ever granted to children of
// occupied level-m cells.
struct FractalState {
  int level = 0;
  std::vector<u128> occupied;  // sorted

  bool extinct() const { return occupied.empty(); }
  bool contains(u128 path) const;
};

GenerationState initial_state();   // single particle in the level-0 cell
FractalState initial_fractal();

// Snapshot export, columns: level,coord_1..coord_d,count (count always 1
// for fractal states).
void export_csv(std::ostream& os, const GenerationState& state, int B, int d,
                bool header = true);
void export_csv(std::ostream& os, const FractalState& state, int B, int d,
                bool header = true);

}  // namespace strm
