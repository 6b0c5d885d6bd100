#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "doctest.h"
#include "strm/errors.hpp"
#include "strm/genealogy.hpp"
#include "strm/grid.hpp"
#include "strm/laws.hpp"
#include "strm/params.hpp"
#include "strm/rng.hpp"
#include "strm/stats.hpp"

using strm::ModelParams;
using strm::OffspringLaw;
using strm::Stream;

namespace {

ModelParams critical_plane() {
  return ModelParams::grid(2, 2, OffspringLaw::poisson(4.0));
}

bool states_equal(const strm::GenerationState& a,
                  const strm::GenerationState& b) {
  if (a.level != b.level || a.total != b.total ||
      a.cells.size() != b.cells.size())
    return false;
  for (size_t i = 0; i < a.cells.size(); ++i)
    if (a.cells[i].path != b.cells[i].path ||
        a.cells[i].count != b.cells[i].count)
      return false;
  return true;
}

// Two-sample chi^2 over a shared binning of total counts.
double totals_chi2_pvalue(const std::vector<uint64_t>& a,
                          const std::vector<uint64_t>& b, uint64_t bin_max) {
  std::vector<double> ca(bin_max + 1, 0.0);
  std::vector<double> cb(bin_max + 1, 0.0);
  for (uint64_t v : a) ca[std::min(v, bin_max)] += 1.0;
  for (uint64_t v : b) cb[std::min(v, bin_max)] += 1.0;
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  double stat = 0.0;
  int dof = 0;
  for (size_t i = 0; i <= bin_max; ++i) {
    const double col = ca[i] + cb[i];
    if (col < 10.0) continue;  // skip sparse bins instead of pooling
    const double ea = col * na / (na + nb);
    const double eb = col * nb / (na + nb);
    stat += (ca[i] - ea) * (ca[i] - ea) / ea;
    stat += (cb[i] - eb) * (cb[i] - eb) / eb;
    ++dof;
  }
  return strm::chi2_pvalue(stat, std::max(1, dof - 1));
}

}  // namespace

TEST_SUITE("grid") {

TEST_CASE("first level count is exactly the offspring law") {
  auto params = critical_plane();
  Stream base = Stream::root(41).fork(strm::tag::kGrid);
  std::vector<uint64_t> counts(26, 0);
  std::vector<double> probs(26, 0.0);
  probs[0] = std::exp(-4.0);
  for (size_t k = 1; k < 26; ++k)
    probs[k] = probs[k - 1] * 4.0 / static_cast<double>(k);
  double tail = 1.0;
  for (size_t k = 0; k < 25; ++k) tail -= probs[k];
  probs[25] = tail;
  for (int r = 0; r < 3000; ++r) {
    auto states = strm::run(params, 1, base.fork(static_cast<uint64_t>(r)));
    REQUIRE(states.size() == 2);
    ++counts[std::min<uint64_t>(states[1].total, 25)];
  }
  auto rep = strm::chi2_goodness_of_fit(counts, probs);
  CHECK(rep.p_value > 1e-5);
}

TEST_CASE("fast and generic sampling paths agree in law") {
  auto params = critical_plane();
  Stream base = Stream::root(42).fork(strm::tag::kGrid);
  std::vector<uint64_t> fast;
  std::vector<uint64_t> generic;
  strm::StepOptions generic_opts;
  generic_opts.force_generic = true;
  for (int r = 0; r < 2500; ++r) {
    strm::RunOptions ro;
    ro.levels = 2;
    auto a = strm::run_strm(params, base.fork(2 * r), ro);
    fast.push_back(a.states[2].total);
    strm::RunOptions rg;
    rg.levels = 2;
    rg.step = generic_opts;
    auto b = strm::run_strm(params, base.fork(2 * r + 1), rg);
    generic.push_back(b.states[2].total);
  }
  CHECK(totals_chi2_pvalue(fast, generic, 40) > 1e-5);
}

TEST_CASE("pruning to a prefix preserves the retained cells exactly") {
  auto params = critical_plane();
  Stream base = Stream::root(43).fork(strm::tag::kGrid);
  int compared = 0;
  for (int r = 0; r < 12; ++r) {
    Stream rs = base.fork(static_cast<uint64_t>(r));
    auto full = strm::run(params, 6, rs);
    if (full[2].extinct()) continue;
    const strm::u128 keep = full[2].cells[0].path;
    strm::RunOptions ro;
    ro.levels = 6;
    ro.prefix_level = 2;
    ro.keep_prefixes = {keep};
    auto pruned = strm::run_strm(params, rs, ro);
    for (int lvl = 2; lvl <= 6; ++lvl) {
      const auto& pcells = pruned.states[static_cast<size_t>(lvl)].cells;
      // Every pruned cell descends from the kept prefix and matches the full
      // run's count; every full-run descendant of the prefix is present.
      size_t matched = 0;
      for (const auto& cell : full[static_cast<size_t>(lvl)].cells) {
        if (strm::path_prefix(cell.path, params.bd_u64(), lvl - 2) != keep)
          continue;
        REQUIRE(matched < pcells.size());
        CHECK(pcells[matched].path == cell.path);
        CHECK(pcells[matched].count == cell.count);
        ++matched;
      }
      CHECK(matched == pcells.size());
    }
    ++compared;
  }
  CHECK(compared > 5);
}

TEST_CASE("explicit forest projects to the generic grid run") {
  auto params = critical_plane();
  Stream base = Stream::root(44).fork(strm::tag::kForest);
  for (int r = 0; r < 10; ++r) {
    Stream rs = base.fork(static_cast<uint64_t>(r));
    auto forest = strm::grow_forest(params, 5, rs);
    strm::RunOptions ro;
    ro.levels = 5;
    ro.step.force_generic = true;
    auto run = strm::run_strm(params, rs, ro);
    for (int g = 0; g <= 5; ++g) {
      auto census = strm::forest_census(forest, g);
      CHECK(states_equal(census, run.states[static_cast<size_t>(g)]));
    }
  }
}

TEST_CASE("results are identical across thread counts") {
  auto params = critical_plane();
  Stream base = Stream::root(45).fork(strm::tag::kGrid);
  for (int r = 0; r < 5; ++r) {
    Stream rs = base.fork(static_cast<uint64_t>(r));
    strm::RunOptions one;
    one.levels = 4;
    one.step.threads = 1;
    strm::RunOptions four;
    four.levels = 4;
    four.step.threads = 4;
    auto a = strm::run_strm(params, rs, one);
    auto b = strm::run_strm(params, rs, four);
    REQUIRE(a.states.size() == b.states.size());
    for (size_t i = 0; i < a.states.size(); ++i)
      CHECK(states_equal(a.states[i], b.states[i]));
  }
}

TEST_CASE("extinction is absorbing") {
  auto params = ModelParams::grid(2, 2, OffspringLaw::deterministic(0));
  Stream rs = Stream::root(46).fork(strm::tag::kGrid).fork(0);
  auto states = strm::run(params, 3, rs);
  CHECK(states[1].extinct());
  CHECK(states[2].extinct());
  CHECK(states[3].extinct());
}

TEST_CASE("population cap raises a resource error") {
  auto params = ModelParams::grid(2, 1, OffspringLaw::deterministic(4));
  Stream rs = Stream::root(47).fork(strm::tag::kGrid).fork(0);
  strm::RunOptions ro;
  ro.levels = 4;
  ro.step.total_cap = 10;
  CHECK_THROWS_AS(strm::run_strm(params, rs, ro), strm::ResourceLimitError);
}

TEST_CASE("fractal runs from one stream are nested across retention") {
  Stream base = Stream::root(48).fork(strm::tag::kFractal);
  for (int r = 0; r < 100; ++r) {
    Stream rs = base.fork(static_cast<uint64_t>(r));
    auto lo = strm::run_fractal(2, 2, 0.5, 6, rs);
    auto hi = strm::run_fractal(2, 2, 0.8, 6, rs);
    for (size_t lvl = 0; lvl < lo.states.size(); ++lvl) {
      const auto& small = lo.states[lvl].occupied;
      const auto& big = hi.states[lvl].occupied;
      CHECK(std::includes(big.begin(), big.end(), small.begin(),
                          small.end()));
    }
  }
}

TEST_CASE("subcritical fractal dies out") {
  Stream base = Stream::root(49).fork(strm::tag::kFractal);
  int extinct = 0;
  for (int r = 0; r < 50; ++r) {
    auto run = strm::run_fractal(2, 2, 0.1, 20, base.fork(r));
    if (run.states.back().extinct()) ++extinct;
  }
  CHECK(extinct == 50);
}

TEST_CASE("mean occupancy of a fixed deep cell matches the measure") {
  // E[count at a fixed level-m cell] = c^m with c = mu B^-d = 1 here, so the
  // origin cell of the critical plane has mean occupancy 1 at every level.
  auto params = critical_plane();
  Stream base = Stream::root(50).fork(strm::tag::kGrid);
  strm::RunningStats occ;
  for (int r = 0; r < 2000; ++r) {
    strm::RunOptions ro;
    ro.levels = 4;
    ro.prefix_level = 4;
    ro.keep_prefixes = {0};
    auto run = strm::run_strm(params, base.fork(static_cast<uint64_t>(r)), ro);
    occ.add(static_cast<double>(run.states[4].count_at(0)));
  }
  CHECK(std::fabs(occ.mean() - 1.0) < 4.0 * occ.stderr_mean() + 1e-9);
}

}  // TEST_SUITE
