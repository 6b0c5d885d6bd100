#include "strm/connectivity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "strm/errors.hpp"
#include "strm/grid.hpp"
#include "strm/parallel.hpp"

namespace strm {

AdjacencyMode adjacency_from_name(const std::string& name) {
  if (name == "face") return AdjacencyMode::kFace;
  if (name == "edge") return AdjacencyMode::kEdge;
  if (name == "closedcube") return AdjacencyMode::kClosedCube;
  throw ConfigError("unknown adjacency mode '" + name +
                    "' (expected face, edge, or closedcube)");
}

std::string adjacency_name(AdjacencyMode mode) {
  switch (mode) {
    case AdjacencyMode::kFace: return "face";
    case AdjacencyMode::kEdge: return "edge";
    case AdjacencyMode::kClosedCube: return "closedcube";
  }
  return "?";
}

PairClass classify_pair(const CellKey& a, const CellKey& b, int B, int d) {
  if (a.level != b.level)
    throw std::domain_error("classify_pair: cells must share a level");
  const std::vector<uint64_t> ca = path_coords(a.path, a.level, B, d);
  const std::vector<uint64_t> cb = path_coords(b.path, b.level, B, d);
  PairClass out;
  int equal = 0;
  for (int i = 0; i < d; ++i) {
    const uint64_t lo = std::min(ca[static_cast<size_t>(i)],
                                 cb[static_cast<size_t>(i)]);
    const uint64_t hi = std::max(ca[static_cast<size_t>(i)],
                                 cb[static_cast<size_t>(i)]);
    if (hi - lo >= 2) {
      out.kind = PairClass::kNotAdjacent;
      return out;
    }
    if (hi == lo) ++equal;
  }
  if (equal == d) {
    out.kind = PairClass::kSame;
    return out;
  }
  out.kind = PairClass::kNeighbour;
  out.ell = equal;
  return out;
}

namespace {

// Allocation-free path<->coordinate codec for one (B, d, level).
class PathCodec {
 public:
  PathCodec(int B, int d, int level)
      : B_(static_cast<uint64_t>(B)), d_(d), level_(level) {
    if (d < 1 || d > 8)
      throw std::domain_error("cell geometry supports d in [1, 8]");
    bd_ = 1;
    for (int i = 0; i < d; ++i) bd_ *= B_;
    side_ = 1;
    for (int k = 0; k < level; ++k) {
      if (side_ > (~uint64_t{0}) / B_)
        throw std::domain_error("cell coordinates exceed 64 bits");
      side_ *= B_;
    }
  }

  uint64_t side() const { return side_; }
  uint64_t bd() const { return bd_; }

  void decode(u128 path, uint64_t* coords) const {
    for (int i = 0; i < d_; ++i) coords[i] = 0;
    uint64_t scale = 1;
    for (int k = 0; k < level_; ++k) {
      uint64_t digit = static_cast<uint64_t>(path % bd_);
      path /= bd_;
      for (int i = 0; i < d_; ++i) {
        coords[i] += (digit % B_) * scale;
        digit /= B_;
      }
      scale *= B_;
    }
  }

  u128 encode(const uint64_t* coords) const {
    uint64_t rem[8];
    for (int i = 0; i < d_; ++i) rem[i] = coords[i];
    uint64_t scale = side_ / (level_ > 0 ? B_ : 1);
    if (level_ == 0) return 0;
    u128 path = 0;
    for (int k = 0; k < level_; ++k) {
      uint64_t digit = 0;
      uint64_t weight = 1;
      for (int i = 0; i < d_; ++i) {
        digit += (rem[i] / scale) * weight;
        rem[i] %= scale;
        weight *= B_;
      }
      path = path * bd_ + digit;
      scale /= B_;
    }
    return path;
  }

 private:
  uint64_t B_;
  int d_;
  int level_;
  uint64_t bd_ = 1;
  uint64_t side_ = 1;
};

// Offset vectors in {-1,0,1}^d \ {0} admitted by the mode, restricted to the
// lexicographically positive half (first nonzero component +1) so each
// unordered pair is visited once.
std::vector<std::vector<int>> half_offsets(int d, AdjacencyMode mode) {
  std::vector<std::vector<int>> out;
  std::vector<int> off(static_cast<size_t>(d), 0);
  long total = 1;
  for (int i = 0; i < d; ++i) total *= 3;
  for (long t = 1; t < total; ++t) {
    long v = t;
    int nonzero = 0;
    int first_nonzero = 0;
    for (int i = 0; i < d; ++i) {
      off[static_cast<size_t>(i)] = static_cast<int>(v % 3) - 1;
      v /= 3;
      if (off[static_cast<size_t>(i)] != 0) {
        if (nonzero == 0) first_nonzero = off[static_cast<size_t>(i)];
        ++nonzero;
      }
    }
    if (nonzero == 0 || first_nonzero != 1) continue;
    bool keep = false;
    switch (mode) {
      case AdjacencyMode::kFace:
        keep = nonzero == 1;
        break;
      case AdjacencyMode::kEdge:
        keep = (d == 1) ? nonzero == 1 : nonzero < d;
        break;
      case AdjacencyMode::kClosedCube:
        keep = true;
        break;
    }
    if (keep) out.push_back(off);
  }
  return out;
}

struct UnionFind {
  std::vector<size_t> parent;
  std::vector<uint64_t> size;

  explicit UnionFind(size_t n) : parent(n), size(n, 1) {
    std::iota(parent.begin(), parent.end(), size_t{0});
  }

  size_t find(size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }

  void unite(size_t a, size_t b) {
    size_t ra = find(a);
    size_t rb = find(b);
    if (ra == rb) return;
    if (size[ra] < size[rb]) std::swap(ra, rb);
    parent[rb] = ra;
    size[ra] += size[rb];
  }
};

size_t find_path(const std::vector<u128>& sorted, u128 path) {
  auto it = std::lower_bound(sorted.begin(), sorted.end(), path);
  if (it != sorted.end() && *it == path)
    return static_cast<size_t>(it - sorted.begin());
  return sorted.size();
}

}  // namespace

CrossReport crossing(const std::vector<u128>& cells_in, int level, int B,
                     int d, AdjacencyMode mode, int axis) {
  if (axis < 1 || axis > d)
    throw ConfigError("crossing: axis must lie in [1, d]");
  if (level < 0) throw ConfigError("crossing: level must be >= 0");
  CrossReport rep;
  rep.level = level;
  rep.mode = mode;
  rep.axis = axis;
  if (cells_in.empty()) return rep;

  std::vector<u128> cells = cells_in;
  std::sort(cells.begin(), cells.end());
  cells.erase(std::unique(cells.begin(), cells.end()), cells.end());
  const size_t n = cells.size();

  const PathCodec codec(B, d, level);
  const uint64_t side = codec.side();
  std::vector<uint64_t> coords(n * static_cast<size_t>(d));
  for (size_t i = 0; i < n; ++i)
    codec.decode(cells[i], &coords[i * static_cast<size_t>(d)]);

  const auto offsets = half_offsets(d, mode);
  UnionFind uf(n);
  uint64_t nb[8];
  for (size_t i = 0; i < n; ++i) {
    const uint64_t* c = &coords[i * static_cast<size_t>(d)];
    for (const auto& off : offsets) {
      bool in_range = true;
      for (int k = 0; k < d; ++k) {
        const int o = off[static_cast<size_t>(k)];
        if (o == -1 && c[k] == 0) { in_range = false; break; }
        if (o == 1 && c[k] + 1 >= side) { in_range = false; break; }
        nb[k] = c[k] + static_cast<uint64_t>(static_cast<int64_t>(o));
      }
      if (!in_range) continue;
      const size_t j = find_path(cells, codec.encode(nb));
      if (j < n) uf.unite(i, j);
    }
  }

  // Fold axis-boundary contact flags and sizes per component root.
  const size_t ax = static_cast<size_t>(axis - 1);
  std::vector<char> touch_lo(n, 0);
  std::vector<char> touch_hi(n, 0);
  std::vector<char> is_root(n, 0);
  for (size_t i = 0; i < n; ++i) {
    const size_t r = uf.find(i);
    is_root[r] = 1;
    const uint64_t a = coords[i * static_cast<size_t>(d) + ax];
    if (a == 0) touch_lo[r] = 1;
    if (a == side - 1) touch_hi[r] = 1;
  }
  for (size_t r = 0; r < n; ++r) {
    if (!is_root[r]) continue;
    ++rep.component_count;
    rep.largest_component = std::max(rep.largest_component, uf.size[r]);
    if (touch_lo[r] && touch_hi[r]) {
      rep.crossed = true;
      rep.spanning_cluster_size =
          std::max(rep.spanning_cluster_size, uf.size[r]);
    }
  }
  return rep;
}

CrossReport crossing(const FractalState& state, int B, int d,
                     AdjacencyMode mode, int axis) {
  return crossing(state.occupied, state.level, B, d, mode, axis);
}

CrossReport crossing(const GenerationState& state, int B, int d,
                     AdjacencyMode mode, int axis) {
  std::vector<u128> paths;
  paths.reserve(state.cells.size());
  for (const CellCount& c : state.cells) paths.push_back(c.path);
  return crossing(paths, state.level, B, d, mode, axis);
}

namespace {

void assert_prefix_transitivity(u128 a, u128 b, int n, int m, int B, int d,
                                u128 pa, u128 pb) {
  const PairClass fine = classify_pair({n, a}, {n, b}, B, d);
  const PairClass coarse = classify_pair({m, pa}, {m, pb}, B, d);
  if (fine.kind != PairClass::kNeighbour ||
      coarse.kind != PairClass::kNeighbour || coarse.ell < fine.ell)
    throw std::logic_error(
        "td_certify: adjacent cross-group cells whose ancestors are not "
        "neighbours of at least the same contact dimension; the projection "
        "property is broken");
}

// Scans the sorted occupied level-n cells for kClosedCube-adjacent pairs
// whose level-m prefixes differ.  With participants == nullptr, returns at
// the first such pair (verifying the prefix-projection property on it);
// otherwise marks both endpoints of every such pair, verifying the property
// on a deterministic ~1/128 hash sample.
bool cross_group_scan(const std::vector<u128>& paths, int n, int m, int B,
                      int d, std::vector<char>* participants) {
  const PathCodec codec(B, d, n);
  const uint64_t side = codec.side();
  const uint64_t bd = codec.bd();
  const size_t count = paths.size();
  std::vector<u128> prefix(count);
  for (size_t i = 0; i < count; ++i)
    prefix[i] = path_prefix(paths[i], bd, n - m);
  std::vector<uint64_t> coords(count * static_cast<size_t>(d));
  for (size_t i = 0; i < count; ++i)
    codec.decode(paths[i], &coords[i * static_cast<size_t>(d)]);

  const auto offsets = half_offsets(d, AdjacencyMode::kClosedCube);
  bool any = false;
  uint64_t nb[8];
  for (size_t i = 0; i < count; ++i) {
    const uint64_t* c = &coords[i * static_cast<size_t>(d)];
    for (const auto& off : offsets) {
      bool in_range = true;
      for (int k = 0; k < d; ++k) {
        const int o = off[static_cast<size_t>(k)];
        if (o == -1 && c[k] == 0) { in_range = false; break; }
        if (o == 1 && c[k] + 1 >= side) { in_range = false; break; }
        nb[k] = c[k] + static_cast<uint64_t>(static_cast<int64_t>(o));
      }
      if (!in_range) continue;
      const size_t j = find_path(paths, codec.encode(nb));
      if (j >= count || prefix[i] == prefix[j]) continue;
      if (participants == nullptr) {
        assert_prefix_transitivity(paths[i], paths[j], n, m, B, d, prefix[i],
                                   prefix[j]);
        return true;
      }
      any = true;
      (*participants)[i] = 1;
      (*participants)[j] = 1;
      const uint64_t h = Stream::mix(static_cast<uint64_t>(paths[i]) ^
                                     Stream::mix(static_cast<uint64_t>(paths[j])));
      if ((h & 127u) == 0)
        assert_prefix_transitivity(paths[i], paths[j], n, m, B, d, prefix[i],
                                   prefix[j]);
    }
  }
  return any;
}

}  // namespace

TdReport td_certify(const std::vector<GenerationState>& run, int m,
                    int horizon, int B, int d) {
  if (m < 0 || horizon < m)
    throw ConfigError("td_certify: need 0 <= m <= horizon");
  if (run.size() <= static_cast<size_t>(horizon))
    throw ConfigError("td_certify: run does not extend to the horizon");
  for (size_t i = 0; i < run.size(); ++i) {
    if (run[i].level != static_cast<int>(i))
      throw ConfigError("td_certify: run levels must be consecutive from 0");
  }
  TdReport rep;
  rep.base_level = m;
  rep.horizon = horizon;
  rep.groups = run[static_cast<size_t>(m)].cells.size();
  if (rep.groups <= 1) {
    rep.found = true;
    rep.separation_level = m;
    return rep;
  }
  for (int n = m; n <= horizon; ++n) {
    std::vector<u128> paths;
    paths.reserve(run[static_cast<size_t>(n)].cells.size());
    for (const CellCount& c : run[static_cast<size_t>(n)].cells)
      paths.push_back(c.path);
    if (!cross_group_scan(paths, n, m, B, d, nullptr)) {
      rep.found = true;
      rep.separation_level = n;
      return rep;
    }
  }
  return rep;
}

TdReport td_certify_streamed(const ModelParams& params,
                             const Stream& run_stream, int m, int horizon,
                             uint64_t participant_cap) {
  if (!params.grid_mode)
    throw ConfigError("td_certify_streamed: params must be in grid mode");
  if (m < 0 || horizon < m)
    throw ConfigError("td_certify_streamed: need 0 <= m <= horizon");
  TdReport rep;
  rep.base_level = m;
  rep.horizon = horizon;

  GenerationState cur = initial_state();
  for (int lv = 0; lv < m; ++lv) cur = step(cur, params, run_stream);
  rep.groups = cur.cells.size();
  if (rep.groups <= 1) {
    rep.found = true;
    rep.separation_level = m;
    return rep;
  }

  for (int n = m;; ++n) {
    std::vector<u128> paths;
    paths.reserve(cur.cells.size());
    for (const CellCount& c : cur.cells) paths.push_back(c.path);
    std::vector<char> part(cur.cells.size(), 0);
    if (!cross_group_scan(paths, n, m, params.B, params.d, &part)) {
      rep.found = true;
      rep.separation_level = n;
      return rep;
    }
    if (n == horizon) return rep;  // still in contact at the horizon

    GenerationState pruned;
    pruned.level = cur.level;
    for (size_t i = 0; i < cur.cells.size(); ++i) {
      if (part[i]) {
        pruned.cells.push_back(cur.cells[i]);
        pruned.total += cur.cells[i].count;
      }
    }
    cur = step(pruned, params, run_stream);
    if (cur.cells.size() > participant_cap) {
      rep.truncated = true;
      return rep;  // found stays false; truncation never invents a verdict
    }
  }
}

SupportStats support_stats(const GenerationState& state,
                           const ModelParams& params) {
  SupportStats out;
  out.occupied_count = state.cells.size();
  out.level = state.level;
  const double m = static_cast<double>(state.level);
  const double diam = std::sqrt(static_cast<double>(params.d)) *
                      std::pow(static_cast<double>(params.B), -m);
  out.h_statistic = static_cast<double>(out.occupied_count) *
                    std::pow(diam, static_cast<double>(params.d)) * m *
                    std::log(static_cast<double>(params.B));
  out.ln_occupied =
      out.occupied_count > 0
          ? std::log(static_cast<double>(out.occupied_count))
          : std::numeric_limits<double>::quiet_NaN();
  return out;
}

namespace {

void check_ball_config(const ModelParams& params, const std::vector<double>& y,
                       double r, int level) {
  if (!params.grid_mode)
    throw ConfigError("ball hit: params must be in grid mode");
  if (params.d > 8) throw ConfigError("ball hit: supports d <= 8");
  if (y.size() != static_cast<size_t>(params.d))
    throw ConfigError("ball hit: centre dimension mismatch");
  if (!(r > 0.0 && r <= 0.5))
    throw ConfigError("ball hit: radius must lie in (0, 1/2]");
  if (level < 1) throw ConfigError("ball hit: level must be >= 1");
  const double cell = std::pow(static_cast<double>(params.B), -level);
  if (cell > r / 4.0)
    throw ConfigError(
        "ball hit: B^-level exceeds r/4; the grid is too coarse to resolve "
        "the ball");
}

// Squared distance from y to the closed cube [coords*s, (coords+1)*s]^d.
double cube_ball_dist2(const uint64_t* coords, double scale,
                       const std::vector<double>& y) {
  double d2 = 0.0;
  for (size_t i = 0; i < y.size(); ++i) {
    const double lo = static_cast<double>(coords[i]) * scale;
    const double hi = lo + scale;
    double gap = 0.0;
    if (y[i] < lo) gap = lo - y[i];
    else if (y[i] > hi) gap = y[i] - hi;
    d2 += gap * gap;
  }
  return d2;
}

}  // namespace

bool ball_hit_once(const ModelParams& params, const std::vector<double>& y,
                   double r, int level, const Stream& run_stream) {
  check_ball_config(params, y, r, level);
  const double r2 = r * r;
  GenerationState state = initial_state();
  uint64_t coords[8];
  for (int n = 0; n < level; ++n) {
    state = step(state, params, run_stream);
    const PathCodec codec(params.B, params.d, state.level);
    const double scale =
        std::pow(static_cast<double>(params.B), -state.level);
    GenerationState kept;
    kept.level = state.level;
    for (const CellCount& c : state.cells) {
      codec.decode(c.path, coords);
      if (cube_ball_dist2(coords, scale, y) <= r2) {
        kept.cells.push_back(c);
        kept.total += c.count;
      }
    }
    state = std::move(kept);
    if (state.extinct()) return false;
  }
  return !state.extinct();
}

BallHitResult ball_hit_estimate(const ModelParams& params,
                                const std::vector<double>& y, double r,
                                int level, uint64_t replicates,
                                const Stream& stream, int threads) {
  check_ball_config(params, y, r, level);
  const std::vector<char> outcomes = parallel_map(
      replicates, threads, [&](uint64_t i) -> char {
        return ball_hit_once(params, y, r, level, stream.fork(i)) ? 1 : 0;
      });
  BallHitResult res;
  res.replicates = replicates;
  for (char c : outcomes) res.hits += static_cast<uint64_t>(c);
  res.frequency = replicates > 0
                      ? static_cast<double>(res.hits) /
                            static_cast<double>(replicates)
                      : 0.0;
  res.interval = wilson_interval(res.hits, replicates, 1.96);
  return res;
}

double ball_hit_exact(const ModelParams& params, const std::vector<double>& y,
                      double r, int level) {
  check_ball_config(params, y, r, level);
  const int d = params.d;
  const int B = params.B;
  if (static_cast<double>(level) * std::log2(static_cast<double>(B)) > 52.0)
    throw ConfigError("ball_hit_exact: level too deep for window arithmetic");

  // Per-level coordinate windows [lo_i, hi_i] covering every cell whose cube
  // can meet the ball, padded by one cell on each side.
  struct Window {
    std::vector<int64_t> lo;
    std::vector<int64_t> width;
    size_t cells = 1;
  };
  auto make_window = [&](int n) {
    Window w;
    w.lo.resize(static_cast<size_t>(d));
    w.width.resize(static_cast<size_t>(d));
    double side = 1.0;
    for (int k = 0; k < n; ++k) side *= static_cast<double>(B);
    for (int i = 0; i < d; ++i) {
      const int64_t last = static_cast<int64_t>(side) - 1;
      int64_t lo = static_cast<int64_t>(
                       std::floor((y[static_cast<size_t>(i)] - r) * side)) -
                   1;
      int64_t hi = static_cast<int64_t>(
                       std::floor((y[static_cast<size_t>(i)] + r) * side)) +
                   1;
      lo = std::max<int64_t>(lo, 0);
      hi = std::min(hi, last);
      w.lo[static_cast<size_t>(i)] = lo;
      w.width[static_cast<size_t>(i)] = hi >= lo ? hi - lo + 1 : 0;
      w.cells *= static_cast<size_t>(std::max<int64_t>(w.width[static_cast<size_t>(i)], 0));
    }
    return w;
  };

  constexpr size_t kWindowCap = 40000000;
  Window wn = make_window(level);
  if (wn.cells > kWindowCap)
    throw ConfigError("ball_hit_exact: window exceeds the memory cap");

  // Boundary level: indicator of cube-ball intersection.
  const double r2 = r * r;
  std::vector<double> u(wn.cells, 0.0);
  {
    const double scale = std::pow(static_cast<double>(B), -level);
    std::vector<int64_t> idx(static_cast<size_t>(d), 0);
    uint64_t coords[8];
    for (size_t flat = 0; flat < wn.cells; ++flat) {
      size_t rem = flat;
      for (int i = d - 1; i >= 0; --i) {
        idx[static_cast<size_t>(i)] =
            static_cast<int64_t>(rem % static_cast<size_t>(wn.width[static_cast<size_t>(i)]));
        rem /= static_cast<size_t>(wn.width[static_cast<size_t>(i)]);
      }
      for (int i = 0; i < d; ++i)
        coords[i] = static_cast<uint64_t>(wn.lo[static_cast<size_t>(i)] +
                                          idx[static_cast<size_t>(i)]);
      if (cube_ball_dist2(coords, scale, y) <= r2) u[flat] = 1.0;
    }
  }

  const double inv_bd = 1.0 / params.bd();
  std::vector<uint64_t> digits(static_cast<size_t>(d), 0);
  for (int n = level - 1; n >= 0; --n) {
    Window wp = make_window(n);
    if (wp.cells > kWindowCap)
      throw ConfigError("ball_hit_exact: window exceeds the memory cap");
    std::vector<double> up(wp.cells, 0.0);
    std::vector<int64_t> idx(static_cast<size_t>(d), 0);
    for (size_t flat = 0; flat < wp.cells; ++flat) {
      size_t rem = flat;
      for (int i = d - 1; i >= 0; --i) {
        idx[static_cast<size_t>(i)] =
            static_cast<int64_t>(rem % static_cast<size_t>(wp.width[static_cast<size_t>(i)]));
        rem /= static_cast<size_t>(wp.width[static_cast<size_t>(i)]);
      }
      // Sum u over the B^d children; children outside the finer window have
      // u = 0 (their cubes cannot meet the ball).
      double sum = 0.0;
      std::fill(digits.begin(), digits.end(), 0);
      for (;;) {
        bool inside = true;
        size_t child_flat = 0;
        for (int i = 0; i < d; ++i) {
          const int64_t cc =
              (wp.lo[static_cast<size_t>(i)] + idx[static_cast<size_t>(i)]) *
                  B +
              static_cast<int64_t>(digits[static_cast<size_t>(i)]);
          const int64_t off = cc - wn.lo[static_cast<size_t>(i)];
          if (off < 0 || off >= wn.width[static_cast<size_t>(i)]) {
            inside = false;
            break;
          }
          child_flat = child_flat * static_cast<size_t>(wn.width[static_cast<size_t>(i)]) +
                       static_cast<size_t>(off);
        }
        if (inside) sum += u[child_flat];
        int i = d - 1;
        for (; i >= 0; --i) {
          if (++digits[static_cast<size_t>(i)] <
              static_cast<uint64_t>(B))
            break;
          digits[static_cast<size_t>(i)] = 0;
        }
        if (i < 0) break;
      }
      up[flat] = params.offspring.survival_map(inv_bd * sum);
    }
    u = std::move(up);
    wn = wp;
  }

  // The root cell (all coordinates zero) is inside the level-0 window
  // whenever that window is non-empty.
  if (wn.cells == 0) return 0.0;
  size_t root_flat = 0;
  for (int i = 0; i < d; ++i) {
    if (wn.lo[static_cast<size_t>(i)] != 0) return 0.0;
    root_flat *= static_cast<size_t>(wn.width[static_cast<size_t>(i)]);
  }
  return u[root_flat];
}

}  // namespace strm
