#include "strm/cell.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace strm {

int max_packed_level(uint64_t bd) {
  if (bd < 2) throw std::domain_error("max_packed_level: B^d must be >= 2");
  const u128 cap = ~static_cast<u128>(0);
  u128 v = 1;
  int level = 0;
  while (v <= cap / bd) {
    v *= bd;
    ++level;
  }
  return level;
}

u128 path_prefix(u128 path, uint64_t bd, int levels_up) {
  for (int i = 0; i < levels_up; ++i) path /= bd;
  return path;
}

namespace {

void check_coord_width(int level, int B) {
  // Coordinates are uint64_t; B^level must fit.
  double bits = static_cast<double>(level) * std::log2(static_cast<double>(B));
  if (bits > 63.0)
    throw std::domain_error("cell coordinates exceed 64 bits at this level");
}

}  // namespace

std::vector<uint64_t> path_coords(u128 path, int level, int B, int d) {
  check_coord_width(level, B);
  std::vector<uint64_t> coords(static_cast<size_t>(d), 0);
  const uint64_t ub = static_cast<uint64_t>(B);
  u128 bd = 1;
  for (int i = 0; i < d; ++i) bd *= ub;
  // Digits come out least-significant (deepest generation) first; that
  // generation contributes B^0 to each coordinate.
  uint64_t scale = 1;
  for (int k = 0; k < level; ++k) {
    uint64_t digit = static_cast<uint64_t>(path % bd);
    path /= bd;
    for (int i = 0; i < d; ++i) {
      coords[static_cast<size_t>(i)] += (digit % ub) * scale;
      digit /= ub;
    }
    scale *= ub;
  }
  return coords;
}

u128 path_from_coords(const std::vector<uint64_t>& coords, int level, int B,
                      int d) {
  check_coord_width(level, B);
  if (coords.size() != static_cast<size_t>(d))
    throw std::domain_error("path_from_coords: wrong coordinate count");
  const uint64_t ub = static_cast<uint64_t>(B);
  u128 bd = 1;
  for (int i = 0; i < d; ++i) bd *= ub;
  u128 path = 0;
  // Peel coordinate digits from most significant generation down.
  uint64_t scale = 1;
  for (int k = 1; k < level; ++k) scale *= ub;
  std::vector<uint64_t> rem = coords;
  for (int k = 0; k < level; ++k) {
    uint64_t digit = 0;
    uint64_t weight = 1;
    for (int i = 0; i < d; ++i) {
      const uint64_t g = rem[static_cast<size_t>(i)] / scale;
      rem[static_cast<size_t>(i)] %= scale;
      digit += g * weight;
      weight *= ub;
    }
    path = path * bd + digit;
    scale /= ub;
  }
  return path;
}

std::string u128_to_string(u128 v) {
  if (v == 0) return "0";
  std::string out;
  while (v > 0) {
    out.push_back(static_cast<char>('0' + static_cast<int>(v % 10)));
    v /= 10;
  }
  std::reverse(out.begin(), out.end());
  return out;
}

std::string u128_to_hex(u128 v) {
  static const char* digits = "0123456789abcdef";
  if (v == 0) return "0";
  std::string out;
  while (v > 0) {
    out.push_back(digits[static_cast<int>(v & 0xf)]);
    v >>= 4;
  }
  std::reverse(out.begin(), out.end());
  return out;
}

}  // namespace strm
