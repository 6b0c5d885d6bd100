#include <algorithm>
#include <cmath>
#include <vector>

#include "artifacts.hpp"
#include "experiments.hpp"
#include "strm/connectivity.hpp"
#include "strm/errors.hpp"
#include "strm/grid.hpp"
#include "strm/parallel.hpp"
#include "strm/stats.hpp"
#include "suites.hpp"

namespace strmlab::suite {

namespace {

using nlohmann::json;
using strm::Stream;

// Occupied fractal cells not backed by at least one particle in the
// occupancy state.  Both cell lists are sorted by path.
uint64_t containment_violations(const strm::FractalState& fractal,
                                const strm::GenerationState& strm_state) {
  uint64_t violations = 0;
  size_t j = 0;
  for (const auto path : fractal.occupied) {
    while (j < strm_state.cells.size() && strm_state.cells[j].path < path)
      ++j;
    if (j == strm_state.cells.size() || strm_state.cells[j].path != path)
      ++violations;
  }
  return violations;
}

// Cells of `lower` whose count exceeds the matching count in `upper`
// (missing counts as 0, so support escapes are violations too).
uint64_t domination_violations(const strm::GenerationState& lower,
                               const strm::GenerationState& upper) {
  uint64_t violations = 0;
  size_t j = 0;
  for (const auto& cell : lower.cells) {
    while (j < upper.cells.size() && upper.cells[j].path < cell.path) ++j;
    const uint64_t upper_count =
        (j < upper.cells.size() && upper.cells[j].path == cell.path)
            ? upper.cells[j].count
            : 0;
    if (cell.count > upper_count) ++violations;
  }
  return violations;
}

}  // namespace

// ---------------------------------------------------- coupling-containment

json coupling_containment_defaults() {
  json d;
  d["params"] = json::parse(
      strm::ModelParams::grid(2, 2, strm::OffspringLaw::poisson(4.0))
          .to_json_text());
  d["levels"] = 12;
  d["c_values"] = {0.6, 1.0};
  d["replicates"] = 1000;
  d["seed"] = 20260823;
  return d;
}

json coupling_containment_run(const ExperimentConfig& cfg) {
  const int levels = cfg.levels;
  if (levels < 1)
    throw strm::ConfigError("coupling-containment: levels must be >= 1");
  std::vector<double> cs = cfg.extra_numbers("c_values", {0.6, 1.0});
  if (cfg.sweep_axis == "c") cs = cfg.sweep_values;
  for (double c : cs)
    if (!(c > 0.0))
      throw strm::ConfigError("coupling-containment: c values must be > 0");

  struct Rec {
    std::vector<uint64_t> strm_occ, frac_occ, viol;
  };
  const Stream base = Stream::root(cfg.seed).fork(strm::tag::kCoupling);
  CsvFile csv(out_path(cfg, "replicates.csv"),
              {"replicate", "c", "level", "strm_occupied", "fractal_occupied",
               "violations"});
  json rows = json::array();
  bool all_zero = true;
  for (size_t ci = 0; ci < cs.size(); ++ci) {
    const double c = cs[ci];
    const Stream cbase = base.fork(ci);
    auto per_rep = strm::parallel_map(
        cfg.replicates, cfg.threads, [&](uint64_t r) {
          strm::StepOptions opts;
          opts.total_cap = cfg.cap;
          const auto run = strm::coupled_run(cfg.params.B, cfg.params.d, c,
                                             levels, cbase.fork(r), opts);
          Rec rec;
          for (const auto& lvl : run) {
            rec.strm_occ.push_back(lvl.strm.cells.size());
            rec.frac_occ.push_back(lvl.fractal.occupied.size());
            rec.viol.push_back(containment_violations(lvl.fractal, lvl.strm));
          }
          return rec;
        });

    uint64_t total_viol = 0;
    uint64_t frac_alive = 0;
    for (uint64_t r = 0; r < cfg.replicates; ++r) {
      const auto& rec = per_rep[r];
      for (size_t m = 0; m < rec.viol.size(); ++m) {
        csv.row(r, c, m, rec.strm_occ[m], rec.frac_occ[m], rec.viol[m]);
        total_viol += rec.viol[m];
      }
      if (rec.frac_occ.back() > 0) ++frac_alive;
    }
    all_zero = all_zero && total_viol == 0;
    json row;
    row["c"] = c;
    row["retention"] = 1.0 - std::exp(-c);
    row["violations"] = total_viol;
    row["fractal_alive_at_horizon"] = freq_entry(frac_alive, cfg.replicates);
    rows.push_back(std::move(row));
  }

  json results;
  results["levels"] = levels;
  results["by_c"] = std::move(rows);
  results["all_containments_hold"] = all_zero;
  return results;
}

// ------------------------------------------------------- monotone-coupling

json monotone_coupling_defaults() {
  json d;
  d["params"] = json::parse(
      strm::ModelParams::grid(2, 2, strm::OffspringLaw::poisson(4.0))
          .to_json_text());
  d["levels"] = 12;
  d["c1"] = 0.6;
  d["c2"] = 1.0;
  d["replicates"] = 1000;
  d["seed"] = 20260823;
  return d;
}

json monotone_coupling_run(const ExperimentConfig& cfg) {
  const int levels = cfg.levels;
  const double c1 = cfg.extra_number("c1", 0.6);
  const double c2 = cfg.extra_number("c2", 1.0);
  if (levels < 1)
    throw strm::ConfigError("monotone-coupling: levels must be >= 1");
  if (!(c1 > 0.0) || !(c2 >= c1))
    throw strm::ConfigError("monotone-coupling: need 0 < c1 <= c2");

  struct Rec {
    std::vector<uint64_t> lower_occ, upper_occ, viol;
  };
  const Stream base = Stream::root(cfg.seed).fork(strm::tag::kCoupling);
  auto per_rep = strm::parallel_map(
      cfg.replicates, cfg.threads, [&](uint64_t r) {
        strm::StepOptions opts;
        opts.total_cap = cfg.cap;
        const auto run =
            strm::monotone_coupled_run(cfg.params.B, cfg.params.d, c1, c2,
                                       levels, base.fork(r), opts);
        Rec rec;
        for (const auto& lvl : run) {
          rec.lower_occ.push_back(lvl.first.cells.size());
          rec.upper_occ.push_back(lvl.second.cells.size());
          rec.viol.push_back(domination_violations(lvl.first, lvl.second));
        }
        return rec;
      });

  CsvFile csv(out_path(cfg, "replicates.csv"),
              {"replicate", "level", "lower_occupied", "upper_occupied",
               "violations"});
  uint64_t total_viol = 0;
  for (uint64_t r = 0; r < cfg.replicates; ++r) {
    const auto& rec = per_rep[r];
    for (size_t m = 0; m < rec.viol.size(); ++m) {
      csv.row(r, m, rec.lower_occ[m], rec.upper_occ[m], rec.viol[m]);
      total_viol += rec.viol[m];
    }
  }

  json results;
  results["levels"] = levels;
  results["c1"] = c1;
  results["c2"] = c2;
  results["violations"] = total_viol;
  results["domination_holds"] = total_viol == 0;
  return results;
}

// ---------------------------------------------------------- crossing-sweep

json crossing_sweep_defaults() {
  json d;
  d["params"] = json::parse(
      strm::ModelParams::grid(2, 2, strm::OffspringLaw::poisson(4.0))
          .to_json_text());
  d["levels"] = 8;
  d["sweep"] = {{"axis", "p"},
                {"values", {0.4, 0.5, 0.55, 0.7, 0.85, 0.95}}};
  d["replicates"] = 1000;
  d["seed"] = 20260823;
  d["adjacency"] = "face";
  d["axis"] = 1;  // crossing direction, 1-based coordinate
  return d;
}

json crossing_sweep_run(const ExperimentConfig& cfg) {
  const int levels = cfg.levels;
  const int axis = cfg.extra_int("axis", 1);
  if (levels < 1)
    throw strm::ConfigError("crossing-sweep: levels must be >= 1");
  std::vector<double> ps = cfg.sweep_values;
  if (ps.empty()) ps = {0.4, 0.5, 0.55, 0.7, 0.85, 0.95};
  if (!cfg.sweep_axis.empty() && cfg.sweep_axis != "p")
    throw strm::ConfigError("crossing-sweep: sweep axis must be 'p'");
  for (double p : ps)
    if (!(p > 0.0) || p > 1.0)
      throw strm::ConfigError("crossing-sweep: p values must lie in (0, 1]");
  std::vector<double> sorted_ps = ps;
  std::sort(sorted_ps.begin(), sorted_ps.end());

  struct Rec {
    std::vector<uint8_t> crossed;
    std::vector<uint64_t> components, largest;
  };
  // All retention values share one replicate stream: the per-(cell, digit)
  // retention uniform does not depend on p, so the occupied sets are nested
  // and each replicate's crossing indicators are monotone in p by
  // construction, while every marginal stays exact.
  const Stream base = Stream::root(cfg.seed).fork(strm::tag::kFractal);
  auto per_rep = strm::parallel_map(
      cfg.replicates, cfg.threads, [&](uint64_t r) {
        const Stream run_stream = base.fork(r);
        Rec rec;
        for (const double p : sorted_ps) {
          const auto run = strm::run_fractal(cfg.params.B, cfg.params.d, p,
                                             levels, run_stream, cfg.cap);
          const auto cross = strm::crossing(run.states.back(), cfg.params.B,
                                            cfg.params.d, cfg.adjacency, axis);
          rec.crossed.push_back(cross.crossed ? 1 : 0);
          rec.components.push_back(cross.component_count);
          rec.largest.push_back(cross.largest_component);
        }
        return rec;
      });

  CsvFile csv(out_path(cfg, "replicates.csv"),
              {"replicate", "p", "crossed", "component_count",
               "largest_component"});
  for (uint64_t r = 0; r < cfg.replicates; ++r)
    for (size_t i = 0; i < sorted_ps.size(); ++i)
      csv.row(r, sorted_ps[i], per_rep[r].crossed[i], per_rep[r].components[i],
              per_rep[r].largest[i]);

  json rows = json::array();
  bool monotone = true;
  double prev = -1.0;
  bool pathwise_monotone = true;
  for (size_t i = 0; i < sorted_ps.size(); ++i) {
    uint64_t hits = 0;
    for (uint64_t r = 0; r < cfg.replicates; ++r) {
      hits += per_rep[r].crossed[i];
      if (i > 0 && per_rep[r].crossed[i - 1] > per_rep[r].crossed[i])
        pathwise_monotone = false;
    }
    json row = freq_entry(hits, cfg.replicates);
    row["p"] = sorted_ps[i];
    const double f =
        static_cast<double>(hits) / static_cast<double>(cfg.replicates);
    if (f < prev) monotone = false;
    prev = f;
    rows.push_back(std::move(row));
  }

  json results;
  results["level"] = levels;
  results["adjacency"] = strm::adjacency_name(cfg.adjacency);
  results["axis"] = axis;
  results["by_p"] = std::move(rows);
  results["monotone_in_p"] = monotone;
  results["pathwise_monotone"] = pathwise_monotone;
  return results;
}

// -------------------------------------------------------------- td-certify

json td_certify_defaults() {
  json d;
  d["params"] = json::parse(
      strm::ModelParams::grid(2, 3, strm::OffspringLaw::poisson(4.0))
          .to_json_text());
  d["base_level"] = 2;
  d["horizon"] = 26;  // 3 * base_level + 20
  d["participant_cap"] = 30000;
  d["replicates"] = 1000;
  d["seed"] = 20260823;
  return d;
}

json td_certify_run(const ExperimentConfig& cfg) {
  const int m = cfg.extra_int("base_level", 2);
  const int horizon = cfg.extra_int("horizon", 3 * m + 20);
  const uint64_t cap = cfg.extra_u64("participant_cap", 30000);

  const Stream base = Stream::root(cfg.seed).fork(strm::tag::kGrid);
  auto reports = strm::parallel_map(
      cfg.replicates, cfg.threads, [&](uint64_t r) {
        return strm::td_certify_streamed(cfg.params, base.fork(r), m, horizon,
                                         cap);
      });

  CsvFile csv(out_path(cfg, "replicates.csv"),
              {"replicate", "groups", "surviving", "found",
               "separation_level", "truncated"});
  uint64_t surviving = 0, found_surviving = 0, truncated = 0;
  std::vector<int> levels_found;
  for (uint64_t r = 0; r < cfg.replicates; ++r) {
    const auto& rep = reports[r];
    const bool alive = rep.groups > 0;
    csv.row(r, rep.groups, alive, rep.found, rep.separation_level,
            rep.truncated);
    if (alive) {
      ++surviving;
      if (rep.found) {
        ++found_surviving;
        levels_found.push_back(rep.separation_level);
      }
    }
    if (rep.truncated) ++truncated;
  }
  std::sort(levels_found.begin(), levels_found.end());

  json results;
  results["base_level"] = m;
  results["horizon"] = horizon;
  results["participant_cap"] = cap;
  results["surviving_runs"] = surviving;
  results["truncated_runs"] = truncated;
  results["success_among_surviving"] = freq_entry(found_surviving, surviving);
  if (!levels_found.empty()) {
    results["separation_level_median"] =
        levels_found[levels_found.size() / 2];
    results["separation_level_p90"] =
        levels_found[(levels_found.size() * 9) / 10];
  }
  return results;
}

// ------------------------------------------------------------ ball-hitting

json ball_hitting_defaults() {
  json d;
  d["params"] = json::parse(
      strm::ModelParams::grid(2, 2, strm::OffspringLaw::poisson(4.0))
          .to_json_text());
  d["y"] = {0.5, 0.5};
  d["radii"] = {0.125, 0.0625, 0.03125, 0.015625};
  d["levels_extra"] = 5;  // resolution level = ceil(log_B 1/r) + levels_extra
  d["replicates"] = 800;
  d["seed"] = 20260823;
  d["band_z"] = 3.0;
  return d;
}

json ball_hitting_run(const ExperimentConfig& cfg) {
  const auto y = cfg.extra_numbers("y", {0.5, 0.5});
  if (static_cast<int>(y.size()) != cfg.params.d)
    throw strm::ConfigError("ball-hitting: y must have d coordinates");
  const auto radii =
      cfg.extra_numbers("radii", {0.125, 0.0625, 0.03125, 0.015625});
  const int extra = cfg.extra_int("levels_extra", 5);
  const double band_z = cfg.extra_number("band_z", 3.0);
  if (extra < 2)
    throw strm::ConfigError("ball-hitting: levels_extra must be >= 2");

  const Stream base = Stream::root(cfg.seed).fork(strm::tag::kGrid);
  CsvFile csv(out_path(cfg, "replicates.csv"),
              {"radius_index", "replicate", "hit"});
  json rows = json::array();
  std::vector<double> exacts;
  for (size_t ri = 0; ri < radii.size(); ++ri) {
    const double r = radii[ri];
    if (!(r > 0.0) || r > 0.5)
      throw strm::ConfigError("ball-hitting: radii must lie in (0, 1/2]");
    const int level =
        static_cast<int>(std::ceil(std::log(1.0 / r) /
                                       std::log(double(cfg.params.B)) -
                                   1e-9)) +
        extra;
    const double exact = strm::ball_hit_exact(cfg.params, y, r, level);
    const Stream rbase = base.fork(ri);
    auto hits_vec = strm::parallel_map(
        cfg.replicates, cfg.threads, [&](uint64_t rep) {
          return static_cast<uint8_t>(
              strm::ball_hit_once(cfg.params, y, r, level, rbase.fork(rep)));
        });
    uint64_t hits = 0;
    for (uint64_t rep = 0; rep < cfg.replicates; ++rep) {
      csv.row(ri, rep, static_cast<uint64_t>(hits_vec[rep]));
      hits += hits_vec[rep];
    }
    json row = freq_entry_z(hits, cfg.replicates, band_z, "wilson_band");
    row["radius"] = r;
    row["level"] = level;
    row["exact"] = exact;
    const auto iv = strm::wilson_interval(hits, cfg.replicates, band_z);
    row["exact_in_band"] = iv.defined && exact >= iv.lo && exact <= iv.hi;
    rows.push_back(std::move(row));
    exacts.push_back(exact);
  }
  for (size_t i = 0; i + 1 < exacts.size(); ++i)
    rows[i]["exact_ratio_to_next"] =
        exacts[i + 1] > 0.0 ? exacts[i] / exacts[i + 1] : 0.0;

  json results;
  results["y"] = y;
  results["band_z"] = band_z;
  results["by_radius"] = std::move(rows);
  return results;
}

// ------------------------------------------------------------ beta-bracket

json beta_bracket_defaults() {
  json d;
  d["params"] = json::parse(
      strm::ModelParams::grid(2, 2, strm::OffspringLaw::poisson(4.0))
          .to_json_text());
  d["levels"] = 8;
  d["betas"] = {1.05, 1.1, 1.2, 4.0 / 3.0, 1.5};
  d["replicates"] = 400;
  d["seed"] = 20260823;
  d["adjacency"] = "face";
  d["axis"] = 1;
  return d;
}

json beta_bracket_run(const ExperimentConfig& cfg) {
  const int levels = cfg.levels;
  const int axis = cfg.extra_int("axis", 1);
  const int d_dim = cfg.params.d;
  const int B = cfg.params.B;
  auto betas = cfg.extra_numbers("betas", {1.05, 1.1, 1.2, 4.0 / 3.0, 1.5});
  std::sort(betas.begin(), betas.end());
  const double lower = 2.0 / d_dim;
  const double upper = 4.0 / (d_dim + 1);
  std::vector<double> ps;
  for (const double beta : betas) {
    if (!(beta >= lower))
      throw strm::ConfigError(
          "beta-bracket: beta values must be >= 2/d (retention <= 1)");
    // Retention giving the branching exponent beta: p = B^(2/beta - d).
    ps.push_back(std::pow(double(B), 2.0 / beta - d_dim));
  }

  const Stream base = Stream::root(cfg.seed).fork(strm::tag::kFractal);
  auto per_rep = strm::parallel_map(
      cfg.replicates, cfg.threads, [&](uint64_t r) {
        const Stream run_stream = base.fork(r);
        std::vector<uint8_t> crossed;
        // Shared stream: occupied sets are nested along decreasing p, so
        // crossing indicators are monotone in beta pathwise.
        for (const double p : ps) {
          const auto run =
              strm::run_fractal(B, d_dim, p, levels, run_stream, cfg.cap);
          const auto cross = strm::crossing(run.states.back(), B, d_dim,
                                            cfg.adjacency, axis);
          crossed.push_back(cross.crossed ? 1 : 0);
        }
        return crossed;
      });

  CsvFile csv(out_path(cfg, "replicates.csv"),
              {"replicate", "beta", "p", "crossed"});
  for (uint64_t r = 0; r < cfg.replicates; ++r)
    for (size_t i = 0; i < betas.size(); ++i)
      csv.row(r, betas[i], ps[i], per_rep[r][i]);

  json rows = json::array();
  std::vector<double> freqs;
  bool nonincreasing = true;
  for (size_t i = 0; i < betas.size(); ++i) {
    uint64_t hits = 0;
    for (uint64_t r = 0; r < cfg.replicates; ++r) hits += per_rep[r][i];
    json row = freq_entry(hits, cfg.replicates);
    row["beta"] = betas[i];
    row["p"] = ps[i];
    rows.push_back(std::move(row));
    const double f =
        static_cast<double>(hits) / static_cast<double>(cfg.replicates);
    if (!freqs.empty() && f > freqs.back() + 1e-12) nonincreasing = false;
    freqs.push_back(f);
  }

  // Crude finite-level threshold: first beta where the crossing frequency
  // falls through 1/2, linearly interpolated.
  json threshold = nullptr;
  for (size_t i = 0; i + 1 < freqs.size(); ++i) {
    if (freqs[i] >= 0.5 && freqs[i + 1] < 0.5) {
      const double t = (freqs[i] - 0.5) / (freqs[i] - freqs[i + 1]);
      threshold = betas[i] + t * (betas[i + 1] - betas[i]);
      break;
    }
  }

  json results;
  results["level"] = levels;
  results["adjacency"] = strm::adjacency_name(cfg.adjacency);
  results["bracket_lower"] = lower;
  results["bracket_upper"] = upper;
  results["by_beta"] = std::move(rows);
  results["freq_nonincreasing_in_beta"] = nonincreasing;
  results["finite_level_threshold_beta"] = threshold;
  results["note"] =
      "finite-level crossing frequencies; the bracket bounds the limiting "
      "threshold, which finite levels approach only slowly";
  return results;
}

}  // namespace strmlab::suite
