#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "strm/params.hpp"
#include "strm/rng.hpp"
#include "strm/state.hpp"
#include "strm/stats.hpp"

namespace strm {

// Adjacency relations between same-level grid cells, ordered by inclusion:
// every kFace edge is a kEdge edge, every kEdge edge is a kClosedCube edge.
//
//   kFace       shared (d-1)-dimensional face: exactly one coordinate
//               differs, by 1.
//   kEdge       the lattice-graph relation: all coordinate gaps <= 1, at
//               least one coordinate equal (touching in a face of dimension
//               >= 1).  Excludes corner-only contact.
//   kClosedCube closures intersect: all coordinate gaps <= 1.  Includes
//               corner-only (0-dimensional) contact.
//
// For d = 1 the three relations are made to coincide (cells touching in an
// endpoint), preserving the inclusion chain in the only sensible way.
enum class AdjacencyMode { kFace, kEdge, kClosedCube };

// Parses "face" / "edge" / "closedcube" (the CLI --adjacency values).
AdjacencyMode adjacency_from_name(const std::string& name);
std::string adjacency_name(AdjacencyMode mode);

// Classification of a same-level cell pair.  For kNeighbour, ell is the
// number of equal coordinates, i.e. the dimension of the face in which the
// two closed cubes intersect; kNotAdjacent iff some coordinate gap is >= 2.
struct PairClass {
  enum Kind { kSame, kNotAdjacent, kNeighbour };
  Kind kind = kNotAdjacent;
  int ell = 0;  // meaningful only for kNeighbour
};

// Throws std::domain_error on level mismatch.  Symmetric in (a, b).
PairClass classify_pair(const CellKey& a, const CellKey& b, int B, int d);

struct CrossReport {
  int level = 0;
  AdjacencyMode mode = AdjacencyMode::kClosedCube;
  int axis = 1;  // 1-based coordinate index
  bool crossed = false;
  uint64_t spanning_cluster_size = 0;  // largest component touching both
                                       // axis boundary layers; 0 if none
  uint64_t component_count = 0;
  uint64_t largest_component = 0;
};

// Union-find connectivity of an occupied-cell set under the given adjacency,
// with crossing detection: crossed is true iff some component contains both
// a cell with coord_axis = 0 and one with coord_axis = B^level - 1.  A
// finite-level "not crossed" certifies non-percolation of the limit support
// (which is contained in the occupied cube union); "crossed" at a finite
// level is evidence only.  Deterministic in the input set.
CrossReport crossing(const std::vector<u128>& cells, int level, int B, int d,
                     AdjacencyMode mode, int axis = 1);
CrossReport crossing(const FractalState& state, int B, int d,
                     AdjacencyMode mode, int axis = 1);
CrossReport crossing(const GenerationState& state, int B, int d,
                     AdjacencyMode mode, int axis = 1);

struct TdReport {
  int base_level = 0;  // m
  bool found = false;
  int separation_level = -1;  // first n with no cross-group contact, if found
  int horizon = 0;
  uint64_t groups = 0;  // occupied level-m cells (live groups at the base)
  bool truncated = false;  // streamed variant hit its population cap
};

// Total-disconnectedness certifier over a materialized run.  Groups the
// occupied level-n cells by their level-m ancestor (the path prefix) for
// n = m..horizon and reports the first n at which no two occupied cells
// from distinct groups are kClosedCube-adjacent (corner contact counts).
// Separation is monotone: once no cross-group contact exists, none can
// reappear, because an adjacent cross-group pair at level n+1 forces its
// parents to be an adjacent cross-group pair at level n.  A run extinct by
// level m is vacuously separated at m.  Throws ConfigError if the run does
// not extend to the horizon.
TdReport td_certify(const std::vector<GenerationState>& run, int m,
                    int horizon, int B, int d);

// Streamed certifier for horizons whose full states cannot be materialized.
// Simulates levels 0..m completely, then evolves only the cells currently
// participating in a cross-group contact: by the parent-projection argument
// above, every future cross-group pair descends from both sides of a
// present one, so the certificate is exact, and because cell streams are
// keyed by (level, path) the retained cells evolve with exactly the draws
// of the full run (td_certify over the same run_stream agrees level for
// level).  If the tracked population exceeds participant_cap the run is
// reported found=false with truncated=true: truncation can suppress a
// separation verdict but never invent one.
TdReport td_certify_streamed(const ModelParams& params,
                             const Stream& run_stream, int m, int horizon,
                             uint64_t participant_cap = 30000);

struct SupportStats {
  uint64_t occupied_count = 0;
  // Finite-level covering sum over occupied cubes, diam^d * log(1/diam)
  // with diam = sqrt(d) * B^-m:  occupied * (sqrt(d) B^-m)^d * m ln B.
  double h_statistic = 0.0;
  // Inputs for the box-counting regression ln(occupied) vs m ln B.
  int level = 0;
  double ln_occupied = 0.0;  // NaN when extinct
};

SupportStats support_stats(const GenerationState& state,
                           const ModelParams& params);

// One pruned run: true iff some occupied level-`level` cube intersects the
// closed ball B(y, r).  Exact despite the pruning: a cell's cube can only
// intersect the ball if its parent's does, so discarding non-intersecting
// cells level by level loses nothing, and cell-keyed streams make the kept
// cells carry the full run's counts.
bool ball_hit_once(const ModelParams& params, const std::vector<double>& y,
                   double r, int level, const Stream& run_stream);

struct BallHitResult {
  uint64_t hits = 0;
  uint64_t replicates = 0;
  double frequency = 0.0;
  Interval interval;  // Wilson 95%
};

// Monte Carlo over replicate streams stream.fork(0..replicates-1).
// Preconditions: 0 < r <= 1/2 and B^-level <= r/4 (else ConfigError: the
// grid is too coarse to resolve the ball).
BallHitResult ball_hit_estimate(const ModelParams& params,
                                const std::vector<double>& y, double r,
                                int level, uint64_t replicates,
                                const Stream& stream, int threads = 1);

// Exact hit probability by backward recursion on the generating function:
// with u_n(x) = P(some occupied level-`level` descendant cube of one
// particle in level-n cell x intersects B(y, r)),
//   u_n(x) = g_Z(B^-d * sum over children x' of u_{n+1}(x'))
// and u_level(x) = 1{cube(x) meets the ball}.  Only cells whose cube meets
// the ball can have u > 0, so each level is evaluated on a coordinate
// window of that size.  Returns u_0(root).  Same preconditions as the
// estimator; additionally requires the window to fit in memory
// ((2 r B^level + 2)^d values).
double ball_hit_exact(const ModelParams& params, const std::vector<double>& y,
                      double r, int level);

}  // namespace strm
