#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "strm/params.hpp"
#include "strm/rng.hpp"
#include "strm/state.hpp"

namespace strm {

struct StepOptions {
  // Use the per-particle generic path even for Poisson offspring.  The fast
  // path draws the B^d child-cell counts of an n-particle cell as
  // independent Poisson(c*n), which is the same law by Poisson thinning and
  // superposition; the generic path is the one that matches the explicit
  // forest draw-for-draw.
  bool force_generic = false;
  int threads = 1;
  // Cap on total particles at any single level; exceeding it raises
  // ResourceLimitError naming the cap.
  uint64_t total_cap = 100000000;
};

// One generation of the occupancy process.  `run_stream` is the per-run
// stream; draws are taken from run_stream.fork(level).fork(path_lo)
// .fork(path_hi), so results are independent of iteration order and thread
// count, and a filtered (pruned) state evolves its surviving cells with
// exactly the draws the full run would have used.
GenerationState step(const GenerationState& state, const ModelParams& params,
                     const Stream& run_stream, const StepOptions& opts = {});

struct StrmRun {
  std::vector<GenerationState> states;  // levels 0..levels inclusive
};

struct RunOptions {
  int levels = 0;
  StepOptions step;
  // Optional exact pruning: when prefix_level >= 0, cells are discarded
  // unless their ancestor at prefix_level (or themselves, above that level,
  // in the ancestor direction) lies on the path to one of keep_prefixes.
  // Because a particle's descendants never leave its cell, and because cell
  // streams are keyed by (level, path), the retained cells carry exactly the
  // counts of the unpruned run: any statistic supported on the kept prefixes
  // is unchanged.  keep_prefixes must be sorted.
  int prefix_level = -1;
  std::vector<u128> keep_prefixes;
};

StrmRun run_strm(const ModelParams& params, const Stream& run_stream,
                 const RunOptions& opts);

// Spec'd convenience form: states 0..levels, default caps.
std::vector<GenerationState> run(const ModelParams& params, int levels,
                                 const Stream& run_stream);

// Fractal percolation: each child of each occupied cell is retained
// independently with probability p.  The retention uniform for (level,
// cell, digit) is a pure function of (run_stream, level, cell, digit), so
// runs at p1 < p2 from the same stream are monotone-coupled pathwise.
FractalState fractal_step(const FractalState& state, double p, int B, int d,
                          const Stream& run_stream);

struct FractalRun {
  std::vector<FractalState> states;
};

FractalRun run_fractal(int B, int d, double p, int levels,
                       const Stream& run_stream,
                       uint64_t cell_cap = 100000000);

// Joint evolution of a Poisson(c*B^d) occupancy process and a fractal
// percolation indicator such that, pathwise, every occupied fractal cell
// holds at least one particle, while the fractal marginal is exactly
// percolation with retention 1 - e^-c.  Construction: in a cell with n
// particles carrying the fractal mark, each child digit draws
// D ~ Poisson(c) (offspring of the distinguished particle) and
// E ~ Poisson(c(n-1)); the child count is D+E and the child mark is {D>=1}.
// This is the cell-level marginal of marking one particle per fractal cell
// and following its thinned offspring.
struct CoupledLevel {
  GenerationState strm;
  FractalState fractal;
};

std::vector<CoupledLevel> coupled_run(int B, int d, double c, int levels,
                                      const Stream& run_stream,
                                      const StepOptions& opts = {});

// Two Poisson occupancy processes with per-subcell means c1 <= c2, coupled
// so the smaller is pathwise dominated: shared part A ~ Poisson(c1*n1),
// surplus ~ Poisson(c2*n2 - c1*n1).  This is the cell-level marginal of
// giving every particle of run 1 its run-2 counterpart plus independent
// Poisson((c2-c1)B^d) extra children with shared digits for the common ones.
// c1 == c2 yields bit-identical twin runs.
std::vector<std::pair<GenerationState, GenerationState>> monotone_coupled_run(
    int B, int d, double c1, double c2, int levels, const Stream& run_stream,
    const StepOptions& opts = {});

}  // namespace strm
