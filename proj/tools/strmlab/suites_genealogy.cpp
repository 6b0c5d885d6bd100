#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "artifacts.hpp"
#include "experiments.hpp"
#include "strm/errors.hpp"
#include "strm/genealogy.hpp"
#include "strm/parallel.hpp"
#include "strm/stats.hpp"
#include "suites.hpp"

namespace strmlab::suite {

namespace {

using nlohmann::json;
using strm::Stream;

}  // namespace

// ---------------------------------------------------- gamma-supermartingale

json gamma_supermartingale_defaults() {
  json d;
  d["params"] = json::parse(
      strm::ModelParams::grid(2, 3, strm::OffspringLaw::poisson(4.0))
          .to_json_text());
  d["ells"] = {0, 1, 2};
  d["n_max"] = 42;  // generations 2..42: forty transitions per trace
  d["replicates"] = 10000;
  d["seed"] = 20260823;
  d["slot_cap"] = 10000000;
  // At ell = d - 1 the per-side candidate rate mu * B^-(d-ell) exceeds one;
  // the matched-slot pruning keeps the tracked population finite, so the
  // suite opts in.
  d["allow_supercritical_candidates"] = true;
  d["drift_kmax"] = 20;
  d["drift_min_samples"] = 10;
  return d;
}

json gamma_supermartingale_run(const ExperimentConfig& cfg) {
  const auto ells = cfg.extra_ints("ells", {0, 1, 2});
  const int n_max = cfg.extra_int("n_max", 42);
  const int kmax = cfg.extra_int("drift_kmax", 20);
  const uint64_t min_samples = cfg.extra_u64("drift_min_samples", 10);
  strm::GammaOptions gopts;
  gopts.slot_cap = cfg.extra_u64("slot_cap", 10000000);
  gopts.allow_supercritical_candidates =
      cfg.extra_bool("allow_supercritical_candidates", true);
  if (n_max < 3)
    throw strm::ConfigError("gamma-supermartingale: n_max must be >= 3");
  for (const int ell : ells)
    if (ell < 0 || ell >= cfg.params.d)
      throw strm::ConfigError(
          "gamma-supermartingale: ell must lie in [0, d)");

  const Stream base = Stream::root(cfg.seed).fork(strm::tag::kGamma);
  CsvFile csv(out_path(cfg, "traces.csv"),
              {"replicate", "ell", "generation", "pair_count"});
  CsvFile drift_csv(out_path(cfg, "drift.csv"),
                    {"ell", "k", "samples", "mean_next", "se", "bound",
                     "tested", "ok"});

  json by_ell = json::array();
  uint64_t absorbed_pooled = 0;
  bool drift_ok_all = true;
  for (size_t ei = 0; ei < ells.size(); ++ei) {
    const int ell = ells[ei];
    const Stream ebase = base.fork(ei);
    auto traces = strm::parallel_map(
        cfg.replicates, cfg.threads, [&](uint64_t r) {
          return strm::gamma_process(cfg.params, ell, n_max, ebase.fork(r),
                                     gopts);
        });

    // Drift pooled over replicates and steps: the expected next pair count
    // from M_n = k must not exceed k (factor B^ell mu^2 B^-2d <= 1).
    std::vector<strm::RunningStats> drift(static_cast<size_t>(kmax) + 1);
    uint64_t absorbed = 0;
    for (uint64_t r = 0; r < cfg.replicates; ++r) {
      const auto& tr = traces[r];
      for (size_t i = 0; i < tr.pair_counts.size(); ++i) {
        csv.row(r, ell, tr.base_generation + static_cast<int>(i),
                tr.pair_counts[i]);
        if (i + 1 < tr.pair_counts.size()) {
          const uint64_t k = tr.pair_counts[i];
          if (k >= 1 && k <= static_cast<uint64_t>(kmax))
            drift[k].add(static_cast<double>(tr.pair_counts[i + 1]));
        }
      }
      if (tr.absorbed) ++absorbed;
    }
    absorbed_pooled += absorbed;

    json drift_rows = json::array();
    bool drift_ok = true;
    for (int k = 1; k <= kmax; ++k) {
      const auto& st = drift[static_cast<size_t>(k)];
      if (st.count() == 0) continue;
      const double se = st.stderr_mean();
      const double bound = k + 3.0 * se;
      const bool tested = st.count() >= min_samples;
      const bool ok = !tested || st.mean() <= bound;
      if (!ok) drift_ok = false;
      drift_csv.row(ell, k, st.count(), st.mean(), se, bound, tested, ok);
      json row;
      row["k"] = k;
      row["samples"] = st.count();
      row["mean_next"] = st.mean();
      row["se"] = se;
      row["bound"] = bound;
      row["tested"] = tested;
      row["ok"] = ok;
      drift_rows.push_back(std::move(row));
    }
    drift_ok_all = drift_ok_all && drift_ok;

    json erow;
    erow["ell"] = ell;
    // Exact one-step factor E[M_{n+1} | M_n] / M_n.
    const double mu = cfg.params.mu();
    erow["drift_factor_exact"] =
        std::pow(double(cfg.params.B), ell) * mu * mu /
        std::pow(cfg.params.bd(), 2);
    erow["absorbed"] = freq_entry(absorbed, cfg.replicates);
    erow["alive_at_horizon"] =
        freq_entry(cfg.replicates - absorbed, cfg.replicates);
    erow["drift"] = std::move(drift_rows);
    erow["drift_ok"] = drift_ok;
    by_ell.push_back(std::move(erow));
  }

  const uint64_t total = cfg.replicates * ells.size();
  json results;
  results["n_max"] = n_max;
  results["by_ell"] = std::move(by_ell);
  results["absorbed_pooled"] = freq_entry(absorbed_pooled, total);
  results["drift_ok_all"] = drift_ok_all;
  results["drift_min_samples"] = min_samples;
  return results;
}

// ------------------------------------------------------------------- spine

json spine_defaults() {
  json d;
  d["params"] = json::parse(
      strm::ModelParams::grid(2, 3, strm::OffspringLaw::poisson(4.0))
          .to_json_text());
  d["chain_steps"] = 100000;
  d["slice_levels"] = {5, 10, 20};
  d["slice_chains"] = {4000000, 2000000, 1000000};
  d["replicates"] = 1;  // independent long chains
  d["seed"] = 20260823;
  return d;
}

json spine_run(const ExperimentConfig& cfg) {
  const int chain_steps = cfg.extra_int("chain_steps", 100000);
  const auto slice_levels = cfg.extra_ints("slice_levels", {5, 10, 20});
  const auto slice_chains_d =
      cfg.extra_numbers("slice_chains", {4000000, 2000000, 1000000});
  if (chain_steps < 3)
    throw strm::ConfigError("spine: chain_steps must be >= 3");
  if (slice_levels.size() != slice_chains_d.size())
    throw strm::ConfigError(
        "spine: slice_levels and slice_chains must have equal length");
  for (const int m : slice_levels)
    if (m < 0) throw strm::ConfigError("spine: slice levels must be >= 0");

  const double closed_form = strm::spine_event_closed_form(cfg.params);
  const Stream base = Stream::root(cfg.seed).fork(strm::tag::kSpine);
  const Stream chain_base = base.fork(0);
  const Stream slice_base = base.fork(1);

  // Long chains: stationary mean of the cohabitant count C_m.
  CsvFile chain_csv(out_path(cfg, "chain.csv"),
                    {"replicate", "step", "excess", "alone"});
  strm::RunningStats mean_c;
  uint64_t alone_steps = 0, pooled_alone = 0, pooled_events = 0;
  uint64_t total_steps = 0;
  for (uint64_t r = 0; r < cfg.replicates; ++r) {
    const auto states =
        strm::spine_run(cfg.params, chain_steps, chain_base.fork(r));
    for (size_t i = 1; i < states.size(); ++i) {
      chain_csv.row(r, states[i].generation, states[i].excess,
                    states[i].alone);
      mean_c.add(static_cast<double>(states[i].excess));
      if (states[i].alone) ++alone_steps;
      ++total_steps;
    }
    for (const auto& s : states) {
      if (!s.event_evaluated) continue;
      ++pooled_alone;
      if (s.event) ++pooled_events;
    }
  }

  json chain_part;
  chain_part["steps_per_chain"] = chain_steps;
  chain_part["chains"] = cfg.replicates;
  chain_part["mean_excess"] =
      mean_entry(mean_c.mean(), mean_c.stderr_mean(), mean_c.count());
  chain_part["alone"] = freq_entry(alone_steps, total_steps);
  chain_part["event_among_alone"] = freq_entry(pooled_events, pooled_alone);
  {
    // Stationary mean of the chain: immigration mean / (1 - cohabitant
    // factor), both exact moments of the offspring law.
    const double mu = cfg.params.mu();
    const double bd = cfg.params.bd();
    const double factor = mu / bd;
    const double imm =
        ((cfg.params.offspring.variance() + mu * mu) / mu - 1.0) / bd;
    chain_part["stationary_mean_exact"] =
        factor < 1.0 ? json(imm / (1.0 - factor)) : json(nullptr);
  }

  // Slices: fresh chains of length m+2 per level, event frequency among
  // chains whose spine is alone at generation m.  The conditional event
  // probability is the same for every m, which is what the overlapping
  // confidence intervals check.
  CsvFile slice_csv(out_path(cfg, "slices.csv"),
                    {"level", "chains", "alone_chains", "events", "frequency",
                     "wilson_lo", "wilson_hi"});
  json slices = json::array();
  std::vector<strm::Interval> cis;
  bool closed_form_in_all = true;
  for (size_t si = 0; si < slice_levels.size(); ++si) {
    const int m = slice_levels[si];
    const auto chains = static_cast<uint64_t>(slice_chains_d[si]);
    const Stream sbase = slice_base.fork(si);
    constexpr uint64_t kChunk = 8192;
    const uint64_t jobs = (chains + kChunk - 1) / kChunk;
    auto counts = strm::parallel_map(
        jobs, cfg.threads, [&](uint64_t j) {
          uint64_t alone = 0, events = 0;
          const uint64_t lo = j * kChunk;
          const uint64_t hi = std::min(chains, lo + kChunk);
          for (uint64_t c = lo; c < hi; ++c) {
            const auto states =
                strm::spine_run(cfg.params, m + 2, sbase.fork(c));
            const auto& st = states[static_cast<size_t>(m)];
            if (!st.event_evaluated) continue;
            ++alone;
            if (st.event) ++events;
          }
          return std::pair<uint64_t, uint64_t>(alone, events);
        });
    uint64_t alone = 0, events = 0;
    for (const auto& [a, e] : counts) {
      alone += a;
      events += e;
    }

    const auto iv = strm::wilson_interval(events, alone);
    slice_csv.row(m, chains, alone, events,
                  alone > 0 ? double(events) / double(alone) : 0.0, iv.lo,
                  iv.hi);
    json row = freq_entry(events, alone);
    row["level"] = m;
    row["chains"] = chains;
    row["closed_form_in_ci"] =
        iv.defined && closed_form >= iv.lo && closed_form <= iv.hi;
    if (!(iv.defined && closed_form >= iv.lo && closed_form <= iv.hi))
      closed_form_in_all = false;
    slices.push_back(std::move(row));
    cis.push_back(iv);
  }
  bool overlap = true;
  for (size_t i = 0; i < cis.size(); ++i)
    for (size_t j = i + 1; j < cis.size(); ++j) {
      if (!cis[i].defined || !cis[j].defined) continue;
      if (cis[i].hi < cis[j].lo || cis[j].hi < cis[i].lo) overlap = false;
    }

  json results;
  results["closed_form"] = closed_form;
  results["chain"] = std::move(chain_part);
  results["slices"] = std::move(slices);
  results["slice_cis_overlap"] = overlap;
  results["closed_form_in_all_slice_cis"] = closed_form_in_all;
  return results;
}

}  // namespace strmlab::suite
