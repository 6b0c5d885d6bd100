#pragma once

#include <cstdint>
#include <vector>

#include "strm/params.hpp"
#include "strm/rng.hpp"
#include "strm/state.hpp"

namespace strm {

// One particle of an explicit forest, materialized on demand from the flat
// arrays below.
struct Particle {
  uint64_t id = 0;
  uint64_t parent = kNoParent;  // kNoParent for the root
  int generation = 0;
  std::vector<uint32_t> digit_history;  // packed digit index per generation,
                                        // oldest first (empty for the root)
  static constexpr uint64_t kNoParent = ~uint64_t{0};
};

// Explicit genealogy in structure-of-arrays form.  Particle ids are indices
// into the arrays; generation g occupies the id range
// [gen_offset[g], gen_offset[g+1]).  Within a generation, particles are
// ordered parent-major (children of earlier particles first) with each
// parent's children in draw order.
struct Forest {
  int B = 2;
  int d = 1;
  std::vector<uint64_t> parent;       // per particle; root maps to kNoParent
  std::vector<uint32_t> birth_digit;  // packed digit index in [0, B^d)
  std::vector<uint64_t> gen_offset;   // size generations()+2

  static constexpr uint64_t kNoParent = Particle::kNoParent;

  int generations() const { return static_cast<int>(gen_offset.size()) - 2; }
  uint64_t size() const { return parent.size(); }
  uint64_t generation_begin(int g) const {
    return gen_offset[static_cast<size_t>(g)];
  }
  uint64_t generation_end(int g) const {
    return gen_offset[static_cast<size_t>(g) + 1];
  }
  Particle particle(uint64_t id) const;
};

// Grows the forest with the same substream keying as the grid engine's
// generic path: within a cell, particle slot i draws from
// cell_stream.fork(i), offspring count first, then one digit per child.
// Consequently forest_census(f, g) equals the level-g state of
// run(params, ...) with StepOptions::force_generic set, cell for cell and
// count for count, under the same run_stream.  Raises ResourceLimitError
// when the population passes `cap`.
Forest grow_forest(const ModelParams& params, int generations,
                   const Stream& run_stream, uint64_t cap = 100000000);

// Cell occupancy of one generation (the projection onto the grid).
GenerationState forest_census(const Forest& forest, int generation);

// Offspring count of every generation-g particle (g < generations()).
std::vector<uint64_t> forest_offspring_counts(const Forest& forest,
                                              int generation);

// Trace of the descendant-pair count M_n of one base pair of ell-neighbour
// cells, the quantity whose supermartingale property drives the
// total-disconnectedness argument at the boundary dimension.
//
// The base pair is built at generation 2 from two forced siblings: their
// cells agree on shared_coords (|shared_coords| = ell) and differ by one on
// every cross coordinate, the f cell on the high side.  Maintaining
// descendant pairs exactly does not require the full populations: a pair at
// generation n+1 extends a pair at generation n at the same shared-position,
// with the f-side child posting digit 0 and the g-side child digit B-1 on
// every cross coordinate (else contact is lost), and with equal digits on
// the shared coordinates.  The trace therefore keeps only matched slots
// (per shared-position counts on both sides); unmatched positions can never
// contribute a future pair, so the law of (M_n) is preserved exactly.
struct GammaTrace {
  int ell = 0;
  int base_generation = 2;
  std::vector<uint64_t> pair_counts;  // M_n for n = base, base+1, ...
  bool absorbed = false;              // last entry is 0
  std::vector<int> shared_coords;
  std::vector<int> cross_coords;
};

struct GammaOptions {
  // Matched slots tracked at once; exceeding raises ResourceLimitError.
  uint64_t slot_cap = 10000000;
  // The per-side candidate population (descendants satisfying the forced
  // cross digits) grows at rate mu * B^-(d-ell) in expectation.  When that
  // rate exceeds 1 the configuration must opt in explicitly, since an
  // unpruned candidate census would diverge.
  bool allow_supercritical_candidates = false;
};

// Evolves M_n from generation 2 to n_max, stopping early at absorption
// (M = 0).  Works for any offspring law: each particle's children draw a
// uniform digit vector and are filtered by the cross-coordinate constraint.
GammaTrace gamma_process(const ModelParams& params, int ell, int n_max,
                         const Stream& stream, const GammaOptions& opts = {});

// One generation of the size-biased spine chain.  `excess` is C_m, the
// number of non-spine particles cohabiting the spine's cell; under the
// tilted law it evolves as a branching process with immigration: each of
// the C_m cohabitants contributes the number of its children that follow
// the spine's next digit, and the spine's Z*-1 siblings immigrate when they
// post that digit too.
struct SpineState {
  int generation = 0;
  uint64_t excess = 0;
  uint32_t spine_digit = 0;  // digit posted entering this generation
  bool alone = false;        // excess == 0
  // The all-move-together event for this generation: everyone in the
  // spine's cell posts the all-ones digit next generation, then everyone in
  // the resulting cell posts the all-zeros digit.  Decidable only when the
  // chain extends two more generations and the spine is alone.
  bool event_evaluated = false;
  bool event = false;
};

// Runs the scalar spine chain for `generations` transitions, drawing every
// sibling and cohabitant-child digit explicitly so the per-generation event
// indicators are exact.  Grid mode only.
std::vector<SpineState> spine_run(const ModelParams& params, int generations,
                                  const Stream& stream);

struct SpineEventReport {
  uint64_t alone_generations = 0;  // alone and evaluable
  uint64_t events = 0;
  double frequency = 0.0;
  bool undefined = false;  // no alone generations observed
  double closed_form = 0.0;
};

// Frequency of the event among alone generations of a single chain,
// against the exact conditional probability
//   (h*(p) / h_Z(p)) * h*(p * h_Z(p)),   p = B^-d,
// where h_Z and h* are the generating functions of Z and of its size-biased
// variant.  (First step: spine child and all Z*-1 siblings post the same
// fixed digit; second step: the spine's next Z*-1 siblings and every child
// of the Z*-1 carried-along cohabitants post another fixed digit.)
SpineEventReport spine_event_frequency(const ModelParams& params,
                                       int generations, const Stream& stream);

double spine_event_closed_form(const ModelParams& params);

}  // namespace strm
