#include "experiments.hpp"

#include <filesystem>

#include "artifacts.hpp"
#include "strm/connectivity.hpp"
#include "strm/errors.hpp"
#include "strm/stats.hpp"
#include "suites.hpp"

namespace strmlab {

const std::vector<SuiteInfo>& suites() {
  static const std::vector<SuiteInfo> kSuites = {
      {"survival",
       "origin-cell (or whole-process) survival frequencies vs the exact "
       "generating-function curve",
       suite::survival_defaults, suite::survival_run},
      {"hitting",
       "exact survival/hitting curves with tail diagnostics plus a deep "
       "survival Monte Carlo cross-check",
       suite::hitting_defaults, suite::hitting_run},
      {"mean-measure",
       "empirical normalized cell means against the uniform (Lebesgue) "
       "value B^-md",
       suite::mean_measure_defaults, suite::mean_measure_run},
      {"coupling-containment",
       "pathwise containment of fractal percolation inside the occupancy "
       "process support",
       suite::coupling_containment_defaults, suite::coupling_containment_run},
      {"monotone-coupling",
       "pathwise count domination between two coupled occupancy processes",
       suite::monotone_coupling_defaults, suite::monotone_coupling_run},
      {"crossing-sweep",
       "fractal left-right crossing frequency along a retention sweep",
       suite::crossing_sweep_defaults, suite::crossing_sweep_run},
      {"td-certify",
       "streamed total-disconnectedness certification success rates",
       suite::td_certify_defaults, suite::td_certify_run},
      {"gamma-supermartingale",
       "neighbour-pair count process: conditional drift and absorption",
       suite::gamma_supermartingale_defaults,
       suite::gamma_supermartingale_run},
      {"spine",
       "size-biased spine immigration chain: stationarity and the "
       "alone-cell event frequency",
       suite::spine_defaults, suite::spine_run},
      {"sbm-validate",
       "branching Brownian bridge checks: marginals, exchangeability, "
       "offspring law",
       suite::sbm_validate_defaults, suite::sbm_validate_run},
      {"growth-exponent",
       "box-count growth slope of the subcritical occupancy process",
       suite::growth_exponent_defaults, suite::growth_exponent_run},
      {"h-statistic",
       "critical covering-sum statistic trend across levels",
       suite::h_statistic_defaults, suite::h_statistic_run},
      {"ball-hitting",
       "ball hitting probabilities: Monte Carlo vs the exact windowed "
       "recursion",
       suite::ball_hitting_defaults, suite::ball_hitting_run},
      {"gw-exact-tables",
       "exact extinction/survival/hitting tables and asymptotic report",
       suite::gw_exact_tables_defaults, suite::gw_exact_tables_run},
      {"beta-bracket",
       "crossing frequency along a branching-exponent sweep around the "
       "percolation bracket (2/d, 4/(d+1)]",
       suite::beta_bracket_defaults, suite::beta_bracket_run},
  };
  return kSuites;
}

const SuiteInfo* find_suite(const std::string& name) {
  for (const auto& s : suites())
    if (name == s.name) return &s;
  return nullptr;
}

nlohmann::json freq_entry(uint64_t successes, uint64_t trials) {
  return freq_entry_z(successes, trials, 1.96, "wilson95");
}

nlohmann::json freq_entry_z(uint64_t successes, uint64_t trials, double z,
                            const std::string& interval_key) {
  nlohmann::json e;
  e["successes"] = successes;
  e["trials"] = trials;
  const strm::Interval iv = strm::wilson_interval(successes, trials, z);
  if (iv.defined) {
    e["frequency"] =
        static_cast<double>(successes) / static_cast<double>(trials);
    e[interval_key] = {iv.lo, iv.hi};
  } else {
    e["frequency"] = nullptr;
    e[interval_key] = nullptr;
  }
  return e;
}

nlohmann::json mean_entry(double mean, double se, uint64_t n) {
  nlohmann::json e;
  e["mean"] = mean;
  e["se"] = se;
  e["ci95"] = {mean - 1.96 * se, mean + 1.96 * se};
  e["n"] = n;
  return e;
}

std::string out_path(const ExperimentConfig& cfg, const std::string& file) {
  return (std::filesystem::path(cfg.out_dir) / file).string();
}

nlohmann::json run_experiment(const ExperimentConfig& cfg) {
  std::filesystem::create_directories(cfg.out_dir);
  const SuiteInfo* info = find_suite(cfg.experiment);
  if (info == nullptr)
    throw strm::ConfigError("unknown experiment '" + cfg.experiment + "'");

  Timer timer;
  nlohmann::json summary;
  summary["tool"] = kToolVersion;
  summary["experiment"] = cfg.experiment;
  summary["seed"] = cfg.seed;
  summary["replicates"] = cfg.replicates;
  summary["config_hash"] = cfg.config_hash_hex();
  summary["config"] = cfg.effective;

  if (cfg.replicates == 0) {
    // Zero replicates is a legal no-op request: empty results, no suite
    // work, exit 0.
    summary["results"] = nlohmann::json::object();
    summary["results"]["note"] = "no replicates requested";
  } else {
    summary["results"] = info->run(cfg);
  }

  nlohmann::json manifest;
  manifest["tool"] = kToolVersion;
  manifest["experiment"] = cfg.experiment;
  manifest["config"] = cfg.effective;
  manifest["config_hash"] = cfg.config_hash_hex();
  manifest["reproduce"] =
      "strmlab " + cfg.experiment +
      " --config <file with this manifest's \"config\" object> --out <dir>";

  nlohmann::json timing;
  timing["experiment"] = cfg.experiment;
  timing["threads"] = cfg.threads;
  timing["wall_seconds"] = timer.seconds();

  write_text_file(out_path(cfg, "summary.json"), summary.dump(2) + "\n");
  write_text_file(out_path(cfg, "manifest.json"), manifest.dump(2) + "\n");
  write_text_file(out_path(cfg, "timing.json"), timing.dump(2) + "\n");
  return summary;
}

}  // namespace strmlab
