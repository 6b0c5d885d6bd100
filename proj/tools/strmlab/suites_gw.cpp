#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "artifacts.hpp"
#include "experiments.hpp"
#include "strm/cell.hpp"
#include "strm/errors.hpp"
#include "strm/grid.hpp"
#include "strm/gw_exact.hpp"
#include "strm/parallel.hpp"
#include "strm/stats.hpp"
#include "suites.hpp"

namespace strmlab::suite {

namespace {

using nlohmann::json;
using strm::GenerationState;
using strm::ModelParams;
using strm::OffspringLaw;
using strm::Stream;

json default_critical_params() {
  return json::parse(
      ModelParams::grid(2, 2, OffspringLaw::poisson(4.0)).to_json_text());
}

json default_subcritical_params() {
  return json::parse(
      ModelParams::grid(2, 3, OffspringLaw::poisson(4.0)).to_json_text());
}

// Survival probability reference for the thinned per-cell chain.
strm::PgfCurve cell_chain_curve(const ExperimentConfig& cfg, int horizon) {
  const double p = 1.0 / cfg.params.bd();
  return strm::survival_curve(cfg.params.offspring, p, horizon);
}

std::string coords_string(strm::u128 path, int level, int B, int d) {
  const auto coords = strm::path_coords(path, level, B, d);
  std::string out;
  for (size_t i = 0; i < coords.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(coords[i]);
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------- survival

json survival_defaults() {
  json d;
  d["params"] = default_critical_params();
  d["levels"] = 8;
  d["replicates"] = 10000;
  d["seed"] = 20260823;
  d["process"] = "strm";      // "strm": origin-cell chain; "fractal": whole
                              // fractal percolation process
  d["fractal_p"] = 0.5;       // retention, fractal mode only
  d["survival_cap"] = 10000;  // fractal mode: occupied count at which
                              // survival is declared (extinction from N
                              // occupied cells has probability q^N)
  d["band_z"] = 3.0;
  return d;
}

json survival_run(const ExperimentConfig& cfg) {
  const std::string process = cfg.effective.value("process", "strm");
  const double band_z = cfg.extra_number("band_z", 3.0);
  const int levels = cfg.levels;
  if (levels < 1) throw strm::ConfigError("survival: levels must be >= 1");
  json results;

  if (process == "strm") {
    // Per replicate, the run is pruned to the origin-cell lineage: the kept
    // cells carry exactly the counts of the full run, so the per-level
    // indicator is the unpruned P(N_m > 0) at a fraction of the cost.
    const Stream base = Stream::root(cfg.seed).fork(strm::tag::kGrid);
    auto per_rep = strm::parallel_map(
        cfg.replicates, cfg.threads, [&](uint64_t r) {
          strm::RunOptions opts;
          opts.levels = levels;
          opts.step.total_cap = cfg.cap;
          opts.prefix_level = levels;
          opts.keep_prefixes = {0};
          const auto run = strm::run_strm(cfg.params, base.fork(r), opts);
          std::vector<uint64_t> counts(static_cast<size_t>(levels) + 1, 0);
          for (const auto& state : run.states)
            counts[static_cast<size_t>(state.level)] = state.count_at(0);
          return counts;
        });

    CsvFile csv(out_path(cfg, "replicates.csv"),
                {"replicate", "level", "count"});
    for (uint64_t r = 0; r < cfg.replicates; ++r)
      for (int m = 1; m <= levels; ++m)
        csv.row(r, m, per_rep[r][static_cast<size_t>(m)]);

    const auto curve = cell_chain_curve(cfg, levels);
    bool all_in_band = true;
    json rows = json::array();
    for (int m = 1; m <= levels; ++m) {
      uint64_t hits = 0;
      for (uint64_t r = 0; r < cfg.replicates; ++r)
        hits += per_rep[r][static_cast<size_t>(m)] > 0 ? 1 : 0;
      json row = freq_entry_z(hits, cfg.replicates, band_z, "wilson_band");
      row["m"] = m;
      const double exact = curve.survival[static_cast<size_t>(m)];
      row["exact"] = exact;
      const auto iv = strm::wilson_interval(hits, cfg.replicates, band_z);
      const bool in_band = iv.defined && exact >= iv.lo && exact <= iv.hi;
      row["exact_in_band"] = in_band;
      all_in_band = all_in_band && in_band;
      rows.push_back(std::move(row));
    }
    results["process"] = "strm";
    results["value_semantics"] = "origin-cell particle count";
    results["band_z"] = band_z;
    results["levels"] = std::move(rows);
    results["all_in_band"] = all_in_band;
    return results;
  }

  if (process != "fractal")
    throw strm::ConfigError("survival: process must be 'strm' or 'fractal'");

  const double p = cfg.extra_number("fractal_p", 0.5);
  if (!(p > 0.0) || p > 1.0)
    throw strm::ConfigError("survival: fractal_p must lie in (0, 1]");
  const uint64_t survival_cap = cfg.extra_u64("survival_cap", 10000);
  struct FractalRecord {
    int extinction_level = -1;  // -1: alive at the horizon (or cap)
    int stop_level = 0;
    bool capped = false;
    std::vector<uint64_t> occupied;
  };
  const Stream base = Stream::root(cfg.seed).fork(strm::tag::kFractal);
  auto per_rep = strm::parallel_map(
      cfg.replicates, cfg.threads, [&](uint64_t r) {
        const Stream run_stream = base.fork(r);
        strm::FractalState st = strm::initial_fractal();
        FractalRecord rec;
        rec.occupied.push_back(1);
        for (int m = 1; m <= levels; ++m) {
          st = strm::fractal_step(st, p, cfg.params.B, cfg.params.d,
                                  run_stream);
          rec.occupied.push_back(st.occupied.size());
          rec.stop_level = m;
          if (st.extinct()) {
            rec.extinction_level = m;
            break;
          }
          if (st.occupied.size() >= survival_cap) {
            rec.capped = true;
            break;
          }
        }
        return rec;
      });

  CsvFile csv(out_path(cfg, "replicates.csv"),
              {"replicate", "level", "count"});
  for (uint64_t r = 0; r < cfg.replicates; ++r)
    for (size_t m = 1; m < per_rep[r].occupied.size(); ++m)
      csv.row(r, m, per_rep[r].occupied[m]);

  uint64_t extinct = 0;
  uint64_t capped = 0;
  for (const auto& rec : per_rep) {
    if (rec.extinction_level >= 0) ++extinct;
    if (rec.capped) ++capped;
  }
  const uint64_t survived = cfg.replicates - extinct;

  // Exact reference: the fractal occupied-cell chain is a branching process
  // with Binomial(B^d, p) offspring.
  const auto law = OffspringLaw::binomial(
      static_cast<uint32_t>(cfg.params.bd_u64()), p);
  double exact_survival = 0.0;
  if (law.mean() > 1.0) exact_survival = 1.0 - strm::extinction_prob(law);

  results["process"] = "fractal";
  results["value_semantics"] = "occupied cells";
  results["fractal_p"] = p;
  results["band_z"] = band_z;
  results["survival_cap"] = survival_cap;
  results["capped_runs"] = capped;
  results["survival"] =
      freq_entry_z(survived, cfg.replicates, band_z, "wilson_band");
  results["extinct_by_horizon"] = freq_entry(extinct, cfg.replicates);
  results["exact_survival"] = exact_survival;
  {
    const auto iv = strm::wilson_interval(survived, cfg.replicates, band_z);
    results["exact_in_band"] =
        iv.defined && exact_survival >= iv.lo && exact_survival <= iv.hi;
  }
  return results;
}

// ----------------------------------------------------------------- hitting

json hitting_defaults() {
  json d;
  d["params"] = default_critical_params();
  d["levels"] = 30;     // depth of the Monte Carlo survival cross-check
  d["horizon"] = 1000;  // depth of the exact curves
  d["replicates"] = 2000;
  d["seed"] = 20260823;
  d["band_z"] = 3.0;
  return d;
}

json hitting_run(const ExperimentConfig& cfg) {
  const int horizon = cfg.extra_int("horizon", 1000);
  const int levels = cfg.levels;
  const double band_z = cfg.extra_number("band_z", 3.0);
  if (levels < 1 || horizon < levels)
    throw strm::ConfigError("hitting: need 1 <= levels <= horizon");

  const double p = 1.0 / cfg.params.bd();
  const auto curve = strm::hitting_curve(cfg.params.offspring, p, horizon);

  {
    CsvFile csv(out_path(cfg, "curve.csv"),
                {"m", "survival", "hitting", "m_survival", "m_hitting",
                 "hitting_over_survival"});
    for (int m = 0; m <= horizon; ++m) {
      const double s = curve.survival[static_cast<size_t>(m)];
      const double h = curve.hitting[static_cast<size_t>(m)];
      csv.row(m, s, h, m * s, m * h, s > 0.0 ? h / s : 0.0);
    }
  }

  const Stream base = Stream::root(cfg.seed).fork(strm::tag::kGrid);
  auto survived_flags = strm::parallel_map(
      cfg.replicates, cfg.threads, [&](uint64_t r) {
        strm::RunOptions opts;
        opts.levels = levels;
        opts.step.total_cap = cfg.cap;
        opts.prefix_level = levels;
        opts.keep_prefixes = {0};
        const auto run = strm::run_strm(cfg.params, base.fork(r), opts);
        return static_cast<uint8_t>(
            !run.states[static_cast<size_t>(levels)].extinct());
      });
  {
    CsvFile csv(out_path(cfg, "replicates.csv"), {"replicate", "survived"});
    for (uint64_t r = 0; r < cfg.replicates; ++r)
      csv.row(r, static_cast<uint64_t>(survived_flags[r]));
  }
  uint64_t hits = 0;
  for (auto f : survived_flags) hits += f;

  json results;
  results["q"] = curve.q;
  results["mean_r"] = curve.mean_r;
  results["var_r"] = curve.var_r;
  const double s_h = curve.survival[static_cast<size_t>(horizon)];
  const double h_h = curve.hitting[static_cast<size_t>(horizon)];
  results["at_horizon"] = {{"m", horizon},
                           {"m_survival", horizon * s_h},
                           {"m_hitting", horizon * h_h},
                           {"hitting_over_survival", h_h / s_h}};
  json mc = freq_entry_z(hits, cfg.replicates, band_z, "wilson_band");
  mc["level"] = levels;
  const double exact = curve.survival[static_cast<size_t>(levels)];
  mc["exact"] = exact;
  const auto iv = strm::wilson_interval(hits, cfg.replicates, band_z);
  mc["exact_in_band"] = iv.defined && exact >= iv.lo && exact <= iv.hi;
  results["deep_survival_mc"] = std::move(mc);
  return results;
}

// ------------------------------------------------------------ mean-measure

json mean_measure_defaults() {
  json d;
  d["params"] = default_critical_params();
  d["levels"] = 5;  // cell level
  d["cells"] = 20;
  d["replicates"] = 10000;
  d["seed"] = 20260823;
  d["band_z"] = 3.0;
  return d;
}

json mean_measure_run(const ExperimentConfig& cfg) {
  const int level = cfg.levels;
  const uint64_t n_cells = cfg.extra_u64("cells", 20);
  const double band_z = cfg.extra_number("band_z", 3.0);
  if (level < 1) throw strm::ConfigError("mean-measure: levels must be >= 1");
  const double bits = level * cfg.params.d * std::log2(double(cfg.params.B));
  if (bits > 62.0)
    throw strm::ConfigError("mean-measure: level too deep to enumerate cells");
  const uint64_t n_paths = [&] {
    uint64_t n = 1;
    for (int i = 0; i < level; ++i) n *= cfg.params.bd_u64();
    return n;
  }();
  if (n_cells == 0 || n_cells > n_paths)
    throw strm::ConfigError("mean-measure: cells must lie in [1, B^(d*level)]");

  // Distinct random target cells, drawn from a selection stream that is
  // independent of every replicate stream.
  Stream sel = Stream::root(cfg.seed).fork(strm::tag::kStats).fork(1);
  std::set<uint64_t> chosen;
  while (chosen.size() < n_cells) chosen.insert(sel.below(n_paths));
  std::vector<strm::u128> cells(chosen.begin(), chosen.end());  // sorted

  const Stream base = Stream::root(cfg.seed).fork(strm::tag::kGrid);
  auto per_rep = strm::parallel_map(
      cfg.replicates, cfg.threads, [&](uint64_t r) {
        strm::RunOptions opts;
        opts.levels = level;
        opts.step.total_cap = cfg.cap;
        opts.prefix_level = level;
        opts.keep_prefixes = cells;
        const auto run = strm::run_strm(cfg.params, base.fork(r), opts);
        const auto& state = run.states[static_cast<size_t>(level)];
        std::vector<uint64_t> counts(cells.size());
        for (size_t i = 0; i < cells.size(); ++i)
          counts[i] = state.count_at(cells[i]);
        return counts;
      });

  CsvFile csv(out_path(cfg, "replicates.csv"),
              {"replicate", "cell_index", "count"});
  for (uint64_t r = 0; r < cfg.replicates; ++r)
    for (size_t i = 0; i < cells.size(); ++i)
      csv.row(r, i, per_rep[r][i]);

  const double scale = std::pow(cfg.params.mu(), -double(level));
  const double exact = std::pow(cfg.params.bd(), -double(level));
  json rows = json::array();
  bool all_in_band = true;
  for (size_t i = 0; i < cells.size(); ++i) {
    strm::RunningStats stats;
    for (uint64_t r = 0; r < cfg.replicates; ++r)
      stats.add(scale * static_cast<double>(per_rep[r][i]));
    json row = mean_entry(stats.mean(), stats.stderr_mean(), stats.count());
    row["cell_index"] = i;
    row["cell"] = coords_string(cells[i], level, cfg.params.B, cfg.params.d);
    row["exact"] = exact;
    const bool in_band =
        std::abs(stats.mean() - exact) <= band_z * stats.stderr_mean();
    row["exact_in_band"] = in_band;
    all_in_band = all_in_band && in_band;
    rows.push_back(std::move(row));
  }

  json results;
  results["level"] = level;
  results["normalization"] = "mu^-m * N_m(cell)";
  results["exact_mean"] = exact;
  results["band_z"] = band_z;
  results["cells"] = std::move(rows);
  results["all_in_band"] = all_in_band;
  return results;
}

// --------------------------------------------------------- gw-exact-tables

json gw_exact_tables_defaults() {
  json d;
  d["params"] = default_critical_params();
  d["horizon"] = 1000;
  d["replicates"] = 1;  // content is exact; replicates=0 still means no-op
  d["seed"] = 20260823;
  return d;
}

json gw_exact_tables_run(const ExperimentConfig& cfg) {
  const int horizon = cfg.extra_int("horizon", 1000);
  double p = 1.0 / cfg.params.bd();
  if (cfg.effective.contains("thinning_p") &&
      !cfg.effective.at("thinning_p").is_null())
    p = cfg.extra_number("thinning_p", p);
  if (!(p > 0.0) || p > 1.0)
    throw strm::ConfigError("gw-exact-tables: thinning_p must be in (0, 1]");

  const auto curve = strm::hitting_curve(cfg.params.offspring, p, horizon);
  const auto report = strm::asymptotic_report(curve);

  {
    CsvFile csv(out_path(cfg, "curve.csv"),
                {"m", "survival", "hitting", "m_times_survival"});
    for (int m = 0; m <= horizon; ++m) {
      const double s = curve.survival[static_cast<size_t>(m)];
      csv.row(m, s, curve.hitting[static_cast<size_t>(m)], m * s);
    }
  }

  json results;
  results["law"] = json::parse(cfg.params.offspring.to_json_text());
  results["thinning_p"] = p;
  results["q"] = curve.q;
  results["mean_r"] = curve.mean_r;
  results["var_r"] = curve.var_r;
  results["survival_at_1"] = curve.survival[1];
  results["underflow_flagged"] = curve.underflow_flagged;
  results["regime"] = report.regime;
  if (report.regime == "critical") {
    results["kolmogorov_constant_est"] = report.kolmogorov_constant_est;
    results["kolmogorov_constant_exact"] = report.kolmogorov_constant_exact;
    results["kolmogorov_constant_nominal"] = report.kolmogorov_constant_nominal;
    results["variance_note"] = report.variance_note;
    results["m_times_survival_at_horizon"] =
        horizon * curve.survival[static_cast<size_t>(horizon)];
  }
  if (report.regime == "subcritical") {
    results["decay_rate_est"] = report.decay_rate_est;
    results["decay_rate_exact"] = std::log(curve.mean_r);
    results["fit_done"] = report.fit_done;
  }
  return results;
}

// --------------------------------------------------------- growth-exponent

json growth_exponent_defaults() {
  json d;
  d["params"] = default_subcritical_params();
  d["levels"] = 12;
  d["fit_min"] = 6;
  d["fit_max"] = 12;
  d["replicates"] = 8;
  d["seed"] = 20260823;
  // Deep subcritical states reach ~10^7 cells; two concurrent replicates
  // keep the peak footprint bounded regardless of the thread knob.
  d["worker_cap"] = 2;
  return d;
}

json growth_exponent_run(const ExperimentConfig& cfg) {
  const int levels = cfg.levels;
  const int fit_min = cfg.extra_int("fit_min", 6);
  const int fit_max = cfg.extra_int("fit_max", 12);
  if (!(1 <= fit_min && fit_min < fit_max && fit_max <= levels))
    throw strm::ConfigError(
        "growth-exponent: need 1 <= fit_min < fit_max <= levels");
  const int workers =
      std::min(cfg.threads, cfg.extra_int("worker_cap", 2));

  const Stream base = Stream::root(cfg.seed).fork(strm::tag::kGrid);
  auto per_rep = strm::parallel_map(
      cfg.replicates, workers, [&](uint64_t r) {
        const Stream run_stream = base.fork(r);
        strm::StepOptions sopts;
        sopts.total_cap = cfg.cap;
        GenerationState st = strm::initial_state();
        std::vector<uint64_t> occ(static_cast<size_t>(levels) + 1, 0);
        occ[0] = 1;
        for (int m = 1; m <= levels; ++m) {
          st = strm::step(st, cfg.params, run_stream, sopts);
          occ[static_cast<size_t>(m)] = st.cells.size();
          if (st.extinct()) break;
        }
        return occ;
      });

  CsvFile csv(out_path(cfg, "replicates.csv"),
              {"replicate", "level", "occupied"});
  for (uint64_t r = 0; r < cfg.replicates; ++r)
    for (int m = 0; m <= levels; ++m)
      csv.row(r, m, per_rep[r][static_cast<size_t>(m)]);

  // Per-replicate slope of ln(occupied) against m ln B over the fit window.
  // Within one replicate the overall martingale-limit factor is common to
  // every level, so it cancels from the slope; replicate slopes concentrate
  // tightly around the exact-expectation slope.
  const double lnB = std::log(double(cfg.params.B));
  std::vector<double> xs;
  for (int m = fit_min; m <= fit_max; ++m) xs.push_back(m * lnB);
  strm::RunningStats slopes;
  json rep_rows = json::array();
  uint64_t dead = 0;
  for (uint64_t r = 0; r < cfg.replicates; ++r) {
    bool alive = true;
    std::vector<double> ys;
    for (int m = fit_min; m <= fit_max; ++m) {
      const uint64_t occ = per_rep[r][static_cast<size_t>(m)];
      if (occ == 0) {
        alive = false;
        break;
      }
      ys.push_back(std::log(static_cast<double>(occ)));
    }
    json row;
    row["replicate"] = r;
    if (alive) {
      const double slope = strm::ols_trend(xs, ys).slope;
      slopes.add(slope);
      row["slope"] = slope;
    } else {
      ++dead;
      row["slope"] = nullptr;
    }
    rep_rows.push_back(std::move(row));
  }

  // Exact-expectation route: E[occupied at m] = B^{dm} s_m.
  const auto curve = cell_chain_curve(cfg, fit_max);
  std::vector<double> ye;
  for (int m = fit_min; m <= fit_max; ++m)
    ye.push_back(m * cfg.params.d * lnB +
                 std::log(curve.survival[static_cast<size_t>(m)]));
  const double exact_slope = strm::ols_trend(xs, ye).slope;

  json results;
  results["fit_window"] = {fit_min, fit_max};
  results["replicate_slopes"] = std::move(rep_rows);
  results["dead_replicates"] = dead;
  if (slopes.count() >= 2)
    results["slope_mc"] =
        mean_entry(slopes.mean(), slopes.stderr_mean(), slopes.count());
  else if (slopes.count() == 1)
    results["slope_mc"] = mean_entry(slopes.mean(), 0.0, 1);
  else
    results["slope_mc"] = nullptr;
  results["slope_exact_expectation"] = exact_slope;
  return results;
}

// ------------------------------------------------------------- h-statistic

json h_statistic_defaults() {
  json d;
  d["params"] = default_critical_params();
  d["fit_min"] = 6;
  d["fit_max"] = 12;
  d["replicates"] = 12;  // independent runs per level (unpaired batches)
  d["seed"] = 20260823;
  d["z_crit"] = 1.645;  // one-sided 5% critical value
  return d;
}

json h_statistic_run(const ExperimentConfig& cfg) {
  const int fit_min = cfg.extra_int("fit_min", 6);
  const int fit_max = cfg.extra_int("fit_max", 12);
  if (!(1 <= fit_min && fit_min < fit_max))
    throw strm::ConfigError("h-statistic: need 1 <= fit_min < fit_max");
  const double z_crit = cfg.extra_number("z_crit", 1.645);
  const int n_levels = fit_max - fit_min + 1;
  const uint64_t total =
      cfg.replicates * static_cast<uint64_t>(n_levels);

  // Independent (unpaired) runs per level; extinct runs contribute h = 0.
  const Stream base = Stream::root(cfg.seed).fork(strm::tag::kGrid);
  auto hs = strm::parallel_map(total, cfg.threads, [&](uint64_t i) {
    const int m = fit_min + static_cast<int>(i / cfg.replicates);
    const Stream run_stream = base.fork(i);
    strm::StepOptions sopts;
    sopts.total_cap = cfg.cap;
    GenerationState st = strm::initial_state();
    for (int lev = 1; lev <= m; ++lev) {
      st = strm::step(st, cfg.params, run_stream, sopts);
      if (st.extinct()) break;
    }
    std::pair<uint64_t, double> out{0, 0.0};
    if (!st.extinct() && st.level == m) {
      const auto stats = strm::support_stats(st, cfg.params);
      out = {stats.occupied_count, stats.h_statistic};
    }
    return out;
  });

  CsvFile csv(out_path(cfg, "replicates.csv"),
              {"replicate", "level", "occupied", "h"});
  for (uint64_t i = 0; i < total; ++i) {
    const int m = fit_min + static_cast<int>(i / cfg.replicates);
    csv.row(i % cfg.replicates, m, hs[i].first, hs[i].second);
  }

  const auto curve = cell_chain_curve(cfg, fit_max);
  const double lnB = std::log(double(cfg.params.B));
  const double diam_pow = std::pow(std::sqrt(double(cfg.params.d)),
                                   double(cfg.params.d));

  json rows = json::array();
  std::vector<double> xs, means, sds;
  for (int m = fit_min; m <= fit_max; ++m) {
    strm::RunningStats stats;
    const uint64_t off =
        static_cast<uint64_t>(m - fit_min) * cfg.replicates;
    for (uint64_t r = 0; r < cfg.replicates; ++r)
      stats.add(hs[off + r].second);
    // E[h] = diam^d B^{dm} s_m m ln B with diam = sqrt(d) B^-m.
    const double exact_mean =
        diam_pow * curve.survival[static_cast<size_t>(m)] * m * lnB;
    json row;
    row["m"] = m;
    row["mean"] = stats.mean();
    row["sd"] = stats.stddev();
    row["n"] = stats.count();
    row["exact_mean"] = exact_mean;
    rows.push_back(std::move(row));
    xs.push_back(double(m));
    means.push_back(stats.mean());
    sds.push_back(stats.stddev());
  }

  // Weighted least squares on the per-level means with inverse-variance
  // weights n / sd^2; the slope standard error comes from those sampling
  // variances, not from residuals.  Levels with zero sample variance (all
  // runs extinct) carry no usable weight and are dropped.
  double sw = 0.0, swx = 0.0;
  std::vector<size_t> used;
  for (size_t i = 0; i < xs.size(); ++i) {
    if (sds[i] > 0.0) {
      const double w = static_cast<double>(cfg.replicates) / (sds[i] * sds[i]);
      sw += w;
      swx += w * xs[i];
      used.push_back(i);
    }
  }
  json trend;
  trend["z_crit"] = z_crit;
  if (used.size() < 3) {
    trend["defined"] = false;
    trend["note"] = "fewer than 3 levels with sample variation";
    trend["significant_positive"] = false;
  } else {
    const double xbar = swx / sw;
    double sxx = 0.0, sxy = 0.0, sy = 0.0;
    for (size_t i : used) {
      const double w = static_cast<double>(cfg.replicates) / (sds[i] * sds[i]);
      sxx += w * (xs[i] - xbar) * (xs[i] - xbar);
      sxy += w * (xs[i] - xbar) * means[i];
      sy += w * means[i];
    }
    const double slope = sxy / sxx;
    const double se = 1.0 / std::sqrt(sxx);
    const double z = slope / se;
    trend["defined"] = true;
    trend["levels_used"] = used.size();
    trend["slope"] = slope;
    trend["se"] = se;
    trend["z"] = z;
    trend["significant_positive"] = z > z_crit;
  }

  json results;
  results["levels"] = std::move(rows);
  results["trend"] = std::move(trend);
  results["note"] =
      "exact per-level means drift upward slowly; the check asks whether the "
      "batch detects a significant positive trend at the configured size";
  return results;
}

}  // namespace strmlab::suite
