#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "config.hpp"

namespace strmlab {

inline constexpr const char* kToolVersion = "strmlab 0.1.0";

// One experiment suite: the runner fills summary["results"]; the common
// wrapper adds identification, hashes and the artifact files.
struct SuiteInfo {
  const char* name;
  const char* blurb;
  nlohmann::json (*defaults)();
  nlohmann::json (*run)(const ExperimentConfig& cfg);
};

const std::vector<SuiteInfo>& suites();
const SuiteInfo* find_suite(const std::string& name);

// Runs one experiment end to end: creates the output directory, dispatches
// to the suite, and writes summary.json, manifest.json and timing.json.
// The suite writes its own CSV artifacts into cfg.out_dir.  Everything
// except timing.json is a pure function of (effective config, seed), so
// outputs are bit-identical across thread counts.  Returns the summary.
nlohmann::json run_experiment(const ExperimentConfig& cfg);

// ---- helpers shared by the suite implementations ----

// {"successes": s, "trials": n, "frequency": f, "wilson95": [lo, hi]}
// (interval key and z are configurable for the 3-sigma acceptance bands).
nlohmann::json freq_entry(uint64_t successes, uint64_t trials);
nlohmann::json freq_entry_z(uint64_t successes, uint64_t trials, double z,
                            const std::string& interval_key);

// {"mean": m, "se": se, "ci95": [m - 1.96 se, m + 1.96 se], "n": n}
nlohmann::json mean_entry(double mean, double se, uint64_t n);

std::string out_path(const ExperimentConfig& cfg, const std::string& file);

}  // namespace strmlab
