#include "strm/state.hpp"

#include <algorithm>
#include <ostream>

namespace strm {

uint64_t GenerationState::count_at(u128 path) const {
  auto it = std::lower_bound(
      cells.begin(), cells.end(), path,
      [](const CellCount& c, u128 p) { return c.path < p; });
  return (it != cells.end() && it->path == path) ? it->count : 0;
}

bool FractalState::contains(u128 path) const {
  return std::binary_search(occupied.begin(), occupied.end(), path);
}

GenerationState initial_state() {
  GenerationState s;
  s.level = 0;
  s.cells.push_back({0, 1});
  s.total = 1;
  return s;
}

FractalState initial_fractal() {
  FractalState s;
  s.level = 0;
  s.occupied.push_back(0);
  return s;
}

namespace {

void write_header(std::ostream& os, int d) {
  os << "level";
  for (int i = 1; i <= d; ++i) os << ",coord_" << i;
  os << ",count\n";
}

void write_row(std::ostream& os, int level, u128 path, uint64_t count, int B,
               int d) {
  os << level;
  for (uint64_t c : path_coords(path, level, B, d)) os << ',' << c;
  os << ',' << count << '\n';
}

}  // namespace

void export_csv(std::ostream& os, const GenerationState& state, int B, int d,
                bool header) {
  if (header) write_header(os, d);
  for (const CellCount& c : state.cells)
    write_row(os, state.level, c.path, c.count, B, d);
}

void export_csv(std::ostream& os, const FractalState& state, int B, int d,
                bool header) {
  if (header) write_header(os, d);
  for (u128 p : state.occupied) write_row(os, state.level, p, 1, B, d);
}

}  // namespace strm
