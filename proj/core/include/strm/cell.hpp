#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace strm {

using u128 = unsigned __int128;

// Cells of the level-m grid are identified by their digit path: the base-B^d
// expansion whose k-th digit (most significant first) is the packed
// displacement index chosen at generation k.  Two properties make this the
// right key:
//   - child paths are parent*B^d + digit, so the children of a sorted cell
//     list, emitted digit-major, are again globally sorted: every level
//     advances with a single linear pass, no hashing or re-sorting;
//   - the level-m' prefix (= the generation-m' ancestor's cell) is an
//     integer division by (B^d)^(m-m').
// Coordinates in [0, B^m)^d are decoded on demand; they are only needed at
// the geometry boundary (adjacency, CSV export).
struct CellKey {
  int level = 0;
  u128 path = 0;
};

// Largest level whose paths still fit in 128 bits for the given B^d.
int max_packed_level(uint64_t bd);

inline u128 path_child(u128 path, uint64_t bd, uint64_t digit_index) {
  return path * bd + digit_index;
}

// Ancestor path `levels_up` generations above.
u128 path_prefix(u128 path, uint64_t bd, int levels_up);

// Decode to coordinates: coord_i = sum_k digit_{k,i} B^(level-1-k).
std::vector<uint64_t> path_coords(u128 path, int level, int B, int d);

// Inverse of path_coords.
u128 path_from_coords(const std::vector<uint64_t>& coords, int level, int B,
                      int d);

std::string u128_to_string(u128 v);
std::string u128_to_hex(u128 v);

}  // namespace strm
