#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "strm/connectivity.hpp"
#include "strm/params.hpp"

namespace strmlab {

// Command-line values that override the config file (flags win).
struct CliOverrides {
  std::optional<uint64_t> seed;
  std::optional<uint64_t> replicates;
  std::optional<int> threads;
  std::optional<std::string> adjacency;
  std::string config_path;  // empty means defaults only
  std::string out_dir;      // required
};

// Fully resolved experiment configuration.  Resolution order, later wins:
// suite defaults, config file, command-line flags.  `effective` holds the
// merged document (minus the out directory and thread count, which are
// location and performance knobs) and is what gets hashed and recorded in
// the manifest, so a manifest is sufficient to re-run the experiment
// exactly.
struct ExperimentConfig {
  std::string experiment;
  strm::ModelParams params = strm::ModelParams::grid(
      2, 2, strm::OffspringLaw::poisson(4.0));
  int levels = 0;
  uint64_t replicates = 0;
  uint64_t seed = 0;
  strm::AdjacencyMode adjacency = strm::AdjacencyMode::kFace;
  std::string sweep_axis;             // "p", "c", "mu" or empty
  std::vector<double> sweep_values;
  std::string out_dir;
  uint64_t cap = 100000000;
  int threads = 1;
  nlohmann::json effective;

  uint64_t config_hash() const;
  std::string config_hash_hex() const;

  // Suite-specific extras with defaults, read from `effective`.
  double extra_number(const std::string& key, double fallback) const;
  uint64_t extra_u64(const std::string& key, uint64_t fallback) const;
  int extra_int(const std::string& key, int fallback) const;
  bool extra_bool(const std::string& key, bool fallback) const;
  std::vector<double> extra_numbers(const std::string& key,
                                    std::vector<double> fallback) const;
  std::vector<int> extra_ints(const std::string& key,
                              std::vector<int> fallback) const;
};

// Builds the resolved config for an experiment.  `defaults` is the suite's
// default document (may include suite-specific keys); the config file (if
// given) and then the flags are layered on top.  Validates common fields and
// the model parameters; throws strm::ConfigError on any problem.
ExperimentConfig resolve_config(const std::string& experiment,
                                const nlohmann::json& defaults,
                                const CliOverrides& cli);

// Default thread count: STRMLAB_THREADS environment variable if set and
// positive, else 1.
int default_threads_from_env();

}  // namespace strmlab
