#include "strm/genealogy.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "strm/errors.hpp"

namespace strm {
namespace {

// Same derivation as the grid engine: draws for a cell are a pure function
// of (run_stream, level, path).
Stream cell_stream(const Stream& run_stream, int level, u128 path) {
  return run_stream.fork(static_cast<uint64_t>(level))
      .fork(static_cast<uint64_t>(path))
      .fork(static_cast<uint64_t>(path >> 64));
}

}  // namespace

Particle Forest::particle(uint64_t id) const {
  if (id >= parent.size())
    throw ConfigError("Forest::particle: id out of range");
  Particle p;
  p.id = id;
  p.parent = parent[id];
  uint64_t cur = id;
  while (parent[cur] != kNoParent) {
    p.digit_history.push_back(birth_digit[cur]);
    cur = parent[cur];
    ++p.generation;
  }
  std::reverse(p.digit_history.begin(), p.digit_history.end());
  return p;
}

Forest grow_forest(const ModelParams& params, int generations,
                   const Stream& run_stream, uint64_t cap) {
  if (!params.grid_mode)
    throw ConfigError("grow_forest: params must be in grid mode");
  if (generations < 0) throw ConfigError("grow_forest: generations >= 0");
  const uint64_t bd = params.bd_u64();
  if (bd > (1u << 16))
    throw ConfigError("grow_forest: needs B^d <= 65536");

  Forest f;
  f.B = params.B;
  f.d = params.d;
  f.parent.push_back(Forest::kNoParent);
  f.birth_digit.push_back(0);
  f.gen_offset = {0, 1};

  // Current generation grouped by cell, groups in ascending path order,
  // slot order within a group fixed by construction.
  struct Group {
    u128 path;
    std::vector<uint64_t> ids;
  };
  std::vector<Group> cur;
  cur.push_back({0, {0}});

  std::vector<std::vector<uint64_t>> bucket(bd);
  for (int g = 0; g < generations; ++g) {
    std::vector<Group> next;
    for (const Group& group : cur) {
      Stream cs = cell_stream(run_stream, g, group.path);
      for (uint64_t i = 0; i < group.ids.size(); ++i) {
        Stream ps = cs.fork(i);
        const uint64_t z = params.offspring.sample(ps);
        for (uint64_t j = 0; j < z; ++j) {
          const uint64_t digit = sample_digit_index(params.d, params.B, ps);
          const uint64_t id = f.parent.size();
          if (id >= cap)
            throw ResourceLimitError("grow_forest: population exceeds cap " +
                                     std::to_string(cap));
          f.parent.push_back(group.ids[i]);
          f.birth_digit.push_back(static_cast<uint32_t>(digit));
          bucket[digit].push_back(id);
        }
      }
      for (uint64_t digit = 0; digit < bd; ++digit) {
        if (bucket[digit].empty()) continue;
        next.push_back({path_child(group.path, bd, digit),
                        std::move(bucket[digit])});
        bucket[digit] = {};
      }
    }
    f.gen_offset.push_back(f.parent.size());
    cur = std::move(next);
  }
  return f;
}

GenerationState forest_census(const Forest& forest, int generation) {
  if (generation < 0 || generation > forest.generations())
    throw ConfigError("forest_census: generation out of range");
  const uint64_t bd_b = static_cast<uint64_t>(forest.B);
  u128 bd = 1;
  for (int i = 0; i < forest.d; ++i) bd *= bd_b;

  // Rebuild cell paths generation by generation.
  std::vector<u128> prev{0};
  uint64_t prev_begin = 0;
  for (int g = 1; g <= generation; ++g) {
    const uint64_t begin = forest.generation_begin(g);
    const uint64_t end = forest.generation_end(g);
    std::vector<u128> cur(end - begin);
    for (uint64_t id = begin; id < end; ++id) {
      const u128 parent_path = prev[forest.parent[id] - prev_begin];
      cur[id - begin] = parent_path * bd + forest.birth_digit[id];
    }
    prev = std::move(cur);
    prev_begin = begin;
  }

  GenerationState state;
  state.level = generation;
  std::sort(prev.begin(), prev.end());
  for (size_t i = 0; i < prev.size();) {
    size_t j = i;
    while (j < prev.size() && prev[j] == prev[i]) ++j;
    state.cells.push_back({prev[i], static_cast<uint64_t>(j - i)});
    i = j;
  }
  state.total = prev.size();
  return state;
}

std::vector<uint64_t> forest_offspring_counts(const Forest& forest,
                                              int generation) {
  if (generation < 0 || generation >= forest.generations())
    throw ConfigError(
        "forest_offspring_counts: generation must have materialized "
        "children");
  const uint64_t begin = forest.generation_begin(generation);
  const uint64_t end = forest.generation_end(generation);
  std::vector<uint64_t> counts(end - begin, 0);
  for (uint64_t id = forest.generation_begin(generation + 1);
       id < forest.generation_end(generation + 1); ++id)
    ++counts[forest.parent[id] - begin];
  return counts;
}

GammaTrace gamma_process(const ModelParams& params, int ell, int n_max,
                         const Stream& stream, const GammaOptions& opts) {
  if (!params.grid_mode)
    throw ConfigError("gamma_process: params must be in grid mode");
  if (ell < 0 || ell >= params.d)
    throw ConfigError("gamma_process: ell must lie in [0, d-1]");
  GammaTrace trace;
  trace.ell = ell;
  trace.base_generation = 2;
  if (n_max < trace.base_generation)
    throw ConfigError("gamma_process: n_max must be >= 2");
  for (int i = 0; i < ell; ++i) trace.shared_coords.push_back(i);
  for (int i = ell; i < params.d; ++i) trace.cross_coords.push_back(i);

  const double candidate_rate =
      params.mu() *
      std::pow(static_cast<double>(params.B),
               -static_cast<double>(params.d - ell));
  if (candidate_rate > 1.0 + 1e-12 && !opts.allow_supercritical_candidates)
    throw ConfigError(
        "gamma_process: per-side candidate growth rate mu*B^-(d-ell) = " +
        std::to_string(candidate_rate) +
        " is supercritical; set allow_supercritical_candidates to confirm");

  const uint64_t bd = params.bd_u64();
  uint64_t b_ell = 1;
  for (int i = 0; i < ell; ++i) b_ell *= static_cast<uint64_t>(params.B);
  const uint32_t B = static_cast<uint32_t>(params.B);
  const uint32_t high_digit = B - 1;

  // Matched slots: per shared-position pair counts on the f and g sides.
  struct Slot {
    uint64_t cf;
    uint64_t cg;
  };
  std::vector<Slot> slots{{1, 1}};
  trace.pair_counts.push_back(1);

  // Child digit classification: returns the shared-coordinate extension
  // index, or b_ell if the cross constraint fails.  `forced` is the digit
  // every cross coordinate must carry (0 on the f side, B-1 on the g side).
  auto classify = [&](uint64_t digit_index, uint32_t forced) -> uint64_t {
    uint64_t ext = 0;
    uint64_t weight = 1;
    for (int i = 0; i < params.d; ++i) {
      const uint32_t gi = static_cast<uint32_t>(digit_index % B);
      digit_index /= B;
      if (i < ell) {
        ext += gi * weight;
        weight *= B;
      } else if (gi != forced) {
        return b_ell;
      }
    }
    return ext;
  };

  std::vector<uint64_t> ext_f(b_ell);
  std::vector<uint64_t> ext_g(b_ell);
  for (int n = trace.base_generation; n < n_max; ++n) {
    Stream step_stream = stream.fork(static_cast<uint64_t>(n));
    std::vector<Slot> next;
    uint64_t m_next = 0;
    for (size_t s = 0; s < slots.size(); ++s) {
      Stream ss = step_stream.fork(s);
      std::fill(ext_f.begin(), ext_f.end(), 0);
      std::fill(ext_g.begin(), ext_g.end(), 0);
      for (int side = 0; side < 2; ++side) {
        Stream side_stream = ss.fork(static_cast<uint64_t>(side));
        const uint64_t parents = side == 0 ? slots[s].cf : slots[s].cg;
        auto& ext = side == 0 ? ext_f : ext_g;
        const uint32_t forced = side == 0 ? 0 : high_digit;
        for (uint64_t i = 0; i < parents; ++i) {
          const uint64_t z = params.offspring.sample(side_stream);
          for (uint64_t j = 0; j < z; ++j) {
            const uint64_t digit = side_stream.below(bd);
            const uint64_t e = classify(digit, forced);
            if (e < b_ell) ++ext[e];
          }
        }
      }
      for (uint64_t e = 0; e < b_ell; ++e) {
        if (ext_f[e] > 0 && ext_g[e] > 0) {
          next.push_back({ext_f[e], ext_g[e]});
          m_next += ext_f[e] * ext_g[e];
        }
      }
      if (next.size() > opts.slot_cap)
        throw ResourceLimitError("gamma_process: matched slots exceed cap " +
                                 std::to_string(opts.slot_cap));
    }
    trace.pair_counts.push_back(m_next);
    slots = std::move(next);
    if (m_next == 0) {
      trace.absorbed = true;
      break;
    }
  }
  return trace;
}

std::vector<SpineState> spine_run(const ModelParams& params, int generations,
                                  const Stream& stream) {
  if (!params.grid_mode)
    throw ConfigError("spine_run: params must be in grid mode");
  if (generations < 0) throw ConfigError("spine_run: generations >= 0");
  if (params.mu() <= 0.0)
    throw ConfigError("spine_run: offspring mean must be positive");
  const uint64_t bd = params.bd_u64();
  uint64_t ones_index = 0;
  {
    uint64_t weight = 1;
    for (int i = 0; i < params.d; ++i) {
      ones_index += weight;  // digit 1 on every coordinate
      weight *= static_cast<uint64_t>(params.B);
    }
  }

  struct Transition {
    uint32_t spine_digit = 0;
    bool sibs_all_ones = true;
    bool sibs_all_zero = true;
    bool coh_children_all_zero = true;
  };

  std::vector<SpineState> states;
  states.reserve(static_cast<size_t>(generations) + 1);
  SpineState s0;
  s0.alone = true;
  states.push_back(s0);
  std::vector<Transition> trans;
  trans.reserve(static_cast<size_t>(generations));

  Stream chain = stream;
  for (int m = 0; m < generations; ++m) {
    const uint64_t excess = states.back().excess;
    Transition t;
    const uint64_t zstar = sample_size_biased(params.offspring, chain);
    const uint64_t spine_digit = chain.below(bd);
    t.spine_digit = static_cast<uint32_t>(spine_digit);
    uint64_t immigration = 0;
    for (uint64_t j = 0; j + 1 < zstar; ++j) {
      const uint64_t digit = chain.below(bd);
      if (digit == spine_digit) ++immigration;
      if (digit != ones_index) t.sibs_all_ones = false;
      if (digit != 0) t.sibs_all_zero = false;
    }
    uint64_t carried = 0;
    for (uint64_t i = 0; i < excess; ++i) {
      const uint64_t z = params.offspring.sample(chain);
      for (uint64_t j = 0; j < z; ++j) {
        const uint64_t digit = chain.below(bd);
        if (digit == spine_digit) ++carried;
        if (digit != 0) t.coh_children_all_zero = false;
      }
    }
    trans.push_back(t);
    SpineState next;
    next.generation = m + 1;
    next.excess = carried + immigration;
    next.spine_digit = t.spine_digit;
    next.alone = next.excess == 0;
    states.push_back(next);
  }

  // The all-move-together event for generation m needs transitions m and
  // m+1 (two more observed generations).
  for (int m = 0; m + 2 <= generations; ++m) {
    SpineState& st = states[static_cast<size_t>(m)];
    if (!st.alone) continue;
    const Transition& t1 = trans[static_cast<size_t>(m)];
    const Transition& t2 = trans[static_cast<size_t>(m) + 1];
    st.event_evaluated = true;
    st.event = t1.spine_digit == ones_index && t1.sibs_all_ones &&
               t2.spine_digit == 0 && t2.sibs_all_zero &&
               t2.coh_children_all_zero;
  }
  return states;
}

double spine_event_closed_form(const ModelParams& params) {
  const double p = 1.0 / params.bd();
  const OffspringLaw star = params.offspring.size_biased();
  const double hz_p = params.offspring.pgf(p);
  return star.pgf(p) / hz_p * star.pgf(p * hz_p);
}

SpineEventReport spine_event_frequency(const ModelParams& params,
                                       int generations,
                                       const Stream& stream) {
  SpineEventReport rep;
  rep.closed_form = spine_event_closed_form(params);
  const std::vector<SpineState> states =
      spine_run(params, generations, stream);
  for (const SpineState& s : states) {
    if (!s.event_evaluated) continue;
    ++rep.alone_generations;
    if (s.event) ++rep.events;
  }
  if (rep.alone_generations == 0) {
    rep.undefined = true;
    return rep;
  }
  rep.frequency = static_cast<double>(rep.events) /
                  static_cast<double>(rep.alone_generations);
  return rep;
}

}  // namespace strm
