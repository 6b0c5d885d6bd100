#include "strm/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <thread>

#include "strm/errors.hpp"

namespace strm {
namespace {

// Lazy table of exp(-c*n); each entry is computed once with a direct exp()
// call, so values are exact and the hot loop never calls exp itself.
class ExpTable {
 public:
  explicit ExpTable(double c) : c_(c) {}

  double at(uint64_t n) {
    if (n >= table_.size()) {
      size_t old = table_.size();
      table_.resize(n + 1);
      for (size_t i = old; i <= n; ++i)
        table_[i] = std::exp(-c_ * static_cast<double>(i));
    }
    return table_[n];
  }

 private:
  double c_;
  std::vector<double> table_{1.0};
};

uint64_t poisson_cached(Stream& s, double lambda, ExpTable& table,
                        uint64_t n) {
  if (lambda <= 0.0) return 0;
  if (lambda < 10.0) return poisson_draw_small(s, lambda, table.at(n));
  return poisson_draw(s, lambda);
}

Stream cell_stream(const Stream& run_stream, int level, u128 path) {
  return run_stream.fork(static_cast<uint64_t>(level))
      .fork(static_cast<uint64_t>(path))
      .fork(static_cast<uint64_t>(path >> 64));
}

void check_child_capacity(int child_level, uint64_t bd) {
  if (child_level > max_packed_level(bd))
    throw ConfigError("level " + std::to_string(child_level) +
                      " exceeds the 128-bit packed cell key capacity for this "
                      "B^d; reduce the level count");
}

// Children of one occupancy cell, appended to `out` in digit order.
void step_cell(const CellCount& cell, int level, const ModelParams& params,
               const Stream& run_stream, bool fast_poisson, ExpTable& expt,
               std::vector<uint64_t>& digit_scratch,
               std::vector<CellCount>& out) {
  const uint64_t bd = params.bd_u64();
  Stream cs = cell_stream(run_stream, level, cell.path);
  if (fast_poisson) {
    const double c = params.c;
    for (uint64_t digit = 0; digit < bd; ++digit) {
      Stream ds = cs.fork(digit);
      const double lambda = c * static_cast<double>(cell.count);
      const uint64_t k = poisson_cached(ds, lambda, expt, cell.count);
      if (k > 0) out.push_back({path_child(cell.path, bd, digit), k});
    }
    return;
  }
  // Generic path: particle i of the cell uses substream fork(i), drawing its
  // offspring count and then one digit per child.  The explicit forest uses
  // the same keying, which is what makes census equality exact.
  std::fill(digit_scratch.begin(), digit_scratch.end(), 0);
  for (uint64_t i = 0; i < cell.count; ++i) {
    Stream ps = cs.fork(i);
    const uint64_t z = params.offspring.sample(ps);
    for (uint64_t j = 0; j < z; ++j)
      ++digit_scratch[sample_digit_index(params.d, params.B, ps)];
  }
  for (uint64_t digit = 0; digit < bd; ++digit) {
    if (digit_scratch[digit] > 0)
      out.push_back({path_child(cell.path, bd, digit), digit_scratch[digit]});
  }
}

}  // namespace

GenerationState step(const GenerationState& state, const ModelParams& params,
                     const Stream& run_stream, const StepOptions& opts) {
  if (!params.grid_mode)
    throw ConfigError("step: params must be in grid mode");
  GenerationState next;
  next.level = state.level + 1;
  if (state.extinct()) return next;
  const uint64_t bd = params.bd_u64();
  check_child_capacity(next.level, bd);
  if (bd > (1u << 16) && !(params.offspring.kind() == LawKind::kPoisson &&
                           !opts.force_generic))
    throw ConfigError("step: generic path needs B^d <= 65536");

  const bool fast =
      params.offspring.kind() == LawKind::kPoisson && !opts.force_generic;
  const int threads =
      std::max(1, std::min<int>(opts.threads,
                                static_cast<int>(state.cells.size())));

  std::vector<std::vector<CellCount>> shards(static_cast<size_t>(threads));
  auto work = [&](int t) {
    ExpTable expt(params.c);
    std::vector<uint64_t> scratch(fast ? 0 : bd, 0);
    auto& out = shards[static_cast<size_t>(t)];
    const size_t n = state.cells.size();
    const size_t lo = n * static_cast<size_t>(t) / static_cast<size_t>(threads);
    const size_t hi =
        n * static_cast<size_t>(t + 1) / static_cast<size_t>(threads);
    out.reserve((hi - lo) * 2);
    for (size_t i = lo; i < hi; ++i)
      step_cell(state.cells[i], state.level, params, run_stream, fast, expt,
                scratch, out);
  };
  if (threads == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(threads - 1));
    for (int t = 1; t < threads; ++t) pool.emplace_back(work, t);
    work(0);
    for (auto& th : pool) th.join();
  }

  size_t cells_total = 0;
  for (const auto& s : shards) cells_total += s.size();
  next.cells.reserve(cells_total);
  for (auto& s : shards) {
    // Shards cover contiguous ascending cell ranges, and each cell emits its
    // children in ascending digit order, so plain concatenation is sorted.
    next.cells.insert(next.cells.end(), s.begin(), s.end());
    s.clear();
    s.shrink_to_fit();
  }
  for (const CellCount& c : next.cells) next.total += c.count;
  if (next.total > opts.total_cap)
    throw ResourceLimitError(
        "step: level " + std::to_string(next.level) + " population " +
        std::to_string(next.total) + " exceeds cap " +
        std::to_string(opts.total_cap));
  return next;
}

namespace {

// Ancestors of the keep set at each level <= prefix_level, for prune tests.
std::vector<std::vector<u128>> build_ancestor_sets(
    const std::vector<u128>& keep, int prefix_level, uint64_t bd) {
  std::vector<std::vector<u128>> sets(static_cast<size_t>(prefix_level) + 1);
  sets[static_cast<size_t>(prefix_level)] = keep;
  for (int lv = prefix_level - 1; lv >= 0; --lv) {
    auto& dst = sets[static_cast<size_t>(lv)];
    for (u128 p : sets[static_cast<size_t>(lv) + 1]) dst.push_back(p / bd);
    dst.erase(std::unique(dst.begin(), dst.end()), dst.end());
  }
  return sets;
}

void prune_state(GenerationState& s, const RunOptions& opts,
                 const std::vector<std::vector<u128>>& ancestors,
                 uint64_t bd) {
  if (opts.prefix_level < 0) return;
  auto kept = [&](u128 path) {
    if (s.level <= opts.prefix_level)
      return std::binary_search(
          ancestors[static_cast<size_t>(s.level)].begin(),
          ancestors[static_cast<size_t>(s.level)].end(), path);
    const u128 pfx = path_prefix(path, bd, s.level - opts.prefix_level);
    return std::binary_search(opts.keep_prefixes.begin(),
                              opts.keep_prefixes.end(), pfx);
  };
  std::vector<CellCount> filtered;
  filtered.reserve(s.cells.size());
  uint64_t total = 0;
  for (const CellCount& c : s.cells) {
    if (kept(c.path)) {
      filtered.push_back(c);
      total += c.count;
    }
  }
  s.cells = std::move(filtered);
  s.total = total;
}

}  // namespace

StrmRun run_strm(const ModelParams& params, const Stream& run_stream,
                 const RunOptions& opts) {
  if (opts.levels < 0) throw ConfigError("run: levels must be >= 0");
  StrmRun out;
  out.states.reserve(static_cast<size_t>(opts.levels) + 1);

  std::vector<std::vector<u128>> ancestors;
  if (opts.prefix_level >= 0) {
    if (!std::is_sorted(opts.keep_prefixes.begin(), opts.keep_prefixes.end()))
      throw ConfigError("run: keep_prefixes must be sorted");
    ancestors =
        build_ancestor_sets(opts.keep_prefixes, opts.prefix_level,
                            params.bd_u64());
  }

  GenerationState cur = initial_state();
  prune_state(cur, opts, ancestors, params.bd_u64());
  out.states.push_back(cur);
  for (int m = 0; m < opts.levels; ++m) {
    if (cur.extinct()) {
      GenerationState empty;
      empty.level = cur.level + 1;
      cur = empty;
    } else {
      cur = step(cur, params, run_stream, opts.step);
      prune_state(cur, opts, ancestors, params.bd_u64());
    }
    out.states.push_back(cur);
  }
  return out;
}

std::vector<GenerationState> run(const ModelParams& params, int levels,
                                 const Stream& run_stream) {
  RunOptions opts;
  opts.levels = levels;
  return run_strm(params, run_stream, opts).states;
}

FractalState fractal_step(const FractalState& state, double p, int B, int d,
                          const Stream& run_stream) {
  if (!(p >= 0.0 && p <= 1.0))
    throw ConfigError("fractal_step: p must lie in [0,1]");
  FractalState next;
  next.level = state.level + 1;
  if (state.extinct() || p == 0.0) return next;
  uint64_t bd = 1;
  for (int i = 0; i < d; ++i) bd *= static_cast<uint64_t>(B);
  check_child_capacity(next.level, bd);
  next.occupied.reserve(state.occupied.size() * 2);
  for (u128 path : state.occupied) {
    Stream cs = cell_stream(run_stream, state.level, path);
    for (uint64_t digit = 0; digit < bd; ++digit) {
      if (cs.fork(digit).uniform() < p)
        next.occupied.push_back(path_child(path, bd, digit));
    }
  }
  return next;
}

FractalRun run_fractal(int B, int d, double p, int levels,
                       const Stream& run_stream, uint64_t cell_cap) {
  FractalRun out;
  out.states.reserve(static_cast<size_t>(levels) + 1);
  FractalState cur = initial_fractal();
  out.states.push_back(cur);
  for (int m = 0; m < levels; ++m) {
    cur = fractal_step(cur, p, B, d, run_stream);
    if (cur.occupied.size() > cell_cap)
      throw ResourceLimitError(
          "run_fractal: level " + std::to_string(cur.level) + " has " +
          std::to_string(cur.occupied.size()) + " cells, cap " +
          std::to_string(cell_cap));
    out.states.push_back(cur);
  }
  return out;
}

std::vector<CoupledLevel> coupled_run(int B, int d, double c, int levels,
                                      const Stream& run_stream,
                                      const StepOptions& opts) {
  uint64_t bd = 1;
  for (int i = 0; i < d; ++i) bd *= static_cast<uint64_t>(B);
  if (!(c > 1.0 / static_cast<double>(bd)))
    throw ConfigError("coupled_run: need c > B^-d for a nondegenerate run");
  std::vector<CoupledLevel> out;
  out.reserve(static_cast<size_t>(levels) + 1);
  out.push_back({initial_state(), initial_fractal()});
  ExpTable exp_c(c);  // for both Poisson(c) and Poisson(c*(n-1)) draws

  for (int m = 0; m < levels; ++m) {
    check_child_capacity(m + 1, bd);
    const CoupledLevel& cur = out[static_cast<size_t>(m)];
    CoupledLevel next;
    next.strm.level = m + 1;
    next.fractal.level = m + 1;
    next.strm.cells.reserve(cur.strm.cells.size() * bd);
    next.fractal.occupied.reserve(cur.fractal.occupied.size() * bd);
    size_t fj = 0;
    for (const CellCount& cell : cur.strm.cells) {
      while (fj < cur.fractal.occupied.size() &&
             cur.fractal.occupied[fj] < cell.path)
        ++fj;
      const bool marked = fj < cur.fractal.occupied.size() &&
                          cur.fractal.occupied[fj] == cell.path;
      Stream cs = cell_stream(run_stream, m, cell.path);
      for (uint64_t digit = 0; digit < bd; ++digit) {
        Stream ds = cs.fork(digit);
        uint64_t count = 0;
        bool child_marked = false;
        if (marked) {
          Stream dstream = ds.fork(0);
          Stream estream = ds.fork(1);
          const uint64_t dcount = poisson_cached(dstream, c, exp_c, 1);
          const uint64_t rest = cell.count - 1;
          const uint64_t ecount = poisson_cached(
              estream, c * static_cast<double>(rest), exp_c, rest);
          count = dcount + ecount;
          child_marked = dcount >= 1;
        } else {
          Stream estream = ds.fork(1);
          count = poisson_cached(
              estream, c * static_cast<double>(cell.count), exp_c, cell.count);
        }
        if (count > 0) {
          next.strm.cells.push_back({path_child(cell.path, bd, digit), count});
          next.strm.total += count;
          if (child_marked)
            next.fractal.occupied.push_back(path_child(cell.path, bd, digit));
        }
      }
    }
    if (next.strm.total > opts.total_cap)
      throw ResourceLimitError(
          "coupled_run: level " + std::to_string(next.strm.level) +
          " population " + std::to_string(next.strm.total) + " exceeds cap " +
          std::to_string(opts.total_cap));
    out.push_back(std::move(next));
  }
  return out;
}

std::vector<std::pair<GenerationState, GenerationState>> monotone_coupled_run(
    int B, int d, double c1, double c2, int levels, const Stream& run_stream,
    const StepOptions& opts) {
  uint64_t bd = 1;
  for (int i = 0; i < d; ++i) bd *= static_cast<uint64_t>(B);
  if (!(c1 > 1.0 / static_cast<double>(bd)) || !(c2 >= c1))
    throw ConfigError("monotone_coupled_run: need B^-d < c1 <= c2");

  std::vector<std::pair<GenerationState, GenerationState>> out;
  out.reserve(static_cast<size_t>(levels) + 1);
  out.emplace_back(initial_state(), initial_state());
  ExpTable exp_c1(c1);
  // exp(-(c2 n2 - c1 n1)) memo for the surplus draws, keyed by (n1, n2).
  constexpr uint64_t kPairDim = 256;
  std::vector<double> pair_exp(kPairDim * kPairDim,
                               std::numeric_limits<double>::quiet_NaN());
  auto surplus_exp = [&](uint64_t n1, uint64_t n2, double lambda) {
    if (n1 < kPairDim && n2 < kPairDim) {
      double& slot = pair_exp[n1 * kPairDim + n2];
      if (std::isnan(slot)) slot = std::exp(-lambda);
      return slot;
    }
    return std::exp(-lambda);
  };

  for (int m = 0; m < levels; ++m) {
    check_child_capacity(m + 1, bd);
    const auto& cur1 = out.back().first;
    const auto& cur2 = out.back().second;
    GenerationState next1;
    GenerationState next2;
    next1.level = m + 1;
    next2.level = m + 1;
    next1.cells.reserve(cur1.cells.size() * bd);
    next2.cells.reserve(cur2.cells.size() * bd);
    // Run 1's support is contained in run 2's by construction, so iterating
    // run 2's cells covers everything.
    size_t i1 = 0;
    for (const CellCount& cell2 : cur2.cells) {
      while (i1 < cur1.cells.size() && cur1.cells[i1].path < cell2.path) ++i1;
      const uint64_t n1 = (i1 < cur1.cells.size() &&
                           cur1.cells[i1].path == cell2.path)
                              ? cur1.cells[i1].count
                              : 0;
      const uint64_t n2 = cell2.count;
      Stream cs = cell_stream(run_stream, m, cell2.path);
      for (uint64_t digit = 0; digit < bd; ++digit) {
        Stream ds = cs.fork(digit);
        Stream shared_stream = ds.fork(0);
        Stream surplus_stream = ds.fork(1);
        const double lam1 = c1 * static_cast<double>(n1);
        const uint64_t shared =
            poisson_cached(shared_stream, lam1, exp_c1, n1);
        const double lam_sur = c2 * static_cast<double>(n2) - lam1;
        uint64_t surplus = 0;
        if (lam_sur > 0.0) {
          surplus = (lam_sur < 10.0)
                        ? poisson_draw_small(surplus_stream, lam_sur,
                                             surplus_exp(n1, n2, lam_sur))
                        : poisson_draw(surplus_stream, lam_sur);
        }
        const u128 child = path_child(cell2.path, bd, digit);
        if (shared > 0) {
          next1.cells.push_back({child, shared});
          next1.total += shared;
        }
        if (shared + surplus > 0) {
          next2.cells.push_back({child, shared + surplus});
          next2.total += shared + surplus;
        }
      }
    }
    if (next2.total > opts.total_cap)
      throw ResourceLimitError(
          "monotone_coupled_run: level " + std::to_string(next2.level) +
          " population " + std::to_string(next2.total) + " exceeds cap " +
          std::to_string(opts.total_cap));
    out.emplace_back(std::move(next1), std::move(next2));
  }
  return out;
}

}  // namespace strm
