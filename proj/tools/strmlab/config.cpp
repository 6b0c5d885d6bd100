#include "config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "artifacts.hpp"
#include "strm/errors.hpp"

namespace strmlab {

namespace {

nlohmann::json parse_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw strm::ConfigError("cannot open config file: " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw strm::ConfigError("config file " + path + ": " + e.what());
  }
}

uint64_t require_u64(const nlohmann::json& doc, const std::string& key) {
  const auto& v = doc.at(key);
  if (!v.is_number_unsigned() && !(v.is_number_integer() &&
                                   v.get<int64_t>() >= 0))
    throw strm::ConfigError("config field '" + key +
                            "' must be a non-negative integer");
  return v.get<uint64_t>();
}

}  // namespace

uint64_t ExperimentConfig::config_hash() const {
  return fnv1a64(effective.dump());
}

std::string ExperimentConfig::config_hash_hex() const {
  return "fnv1a64:" + hex64(config_hash());
}

double ExperimentConfig::extra_number(const std::string& key,
                                      double fallback) const {
  if (!effective.contains(key)) return fallback;
  if (!effective.at(key).is_number())
    throw strm::ConfigError("config field '" + key + "' must be a number");
  return effective.at(key).get<double>();
}

uint64_t ExperimentConfig::extra_u64(const std::string& key,
                                     uint64_t fallback) const {
  if (!effective.contains(key)) return fallback;
  return require_u64(effective, key);
}

int ExperimentConfig::extra_int(const std::string& key, int fallback) const {
  if (!effective.contains(key)) return fallback;
  if (!effective.at(key).is_number_integer())
    throw strm::ConfigError("config field '" + key + "' must be an integer");
  return effective.at(key).get<int>();
}

bool ExperimentConfig::extra_bool(const std::string& key,
                                  bool fallback) const {
  if (!effective.contains(key)) return fallback;
  if (!effective.at(key).is_boolean())
    throw strm::ConfigError("config field '" + key + "' must be a boolean");
  return effective.at(key).get<bool>();
}

std::vector<double> ExperimentConfig::extra_numbers(
    const std::string& key, std::vector<double> fallback) const {
  if (!effective.contains(key)) return fallback;
  const auto& v = effective.at(key);
  if (!v.is_array())
    throw strm::ConfigError("config field '" + key +
                            "' must be an array of numbers");
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number())
      throw strm::ConfigError("config field '" + key +
                              "' must be an array of numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

std::vector<int> ExperimentConfig::extra_ints(const std::string& key,
                                              std::vector<int> fallback) const {
  if (!effective.contains(key)) return fallback;
  const auto& v = effective.at(key);
  if (!v.is_array())
    throw strm::ConfigError("config field '" + key +
                            "' must be an array of integers");
  std::vector<int> out;
  for (const auto& x : v) {
    if (!x.is_number_integer())
      throw strm::ConfigError("config field '" + key +
                              "' must be an array of integers");
    out.push_back(x.get<int>());
  }
  return out;
}

int default_threads_from_env() {
  const char* env = std::getenv("STRMLAB_THREADS");
  if (env == nullptr || *env == '\0') return 1;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (end == env || *end != '\0' || v < 1 || v > 4096) return 1;
  return static_cast<int>(v);
}

ExperimentConfig resolve_config(const std::string& experiment,
                                const nlohmann::json& defaults,
                                const CliOverrides& cli) {
  nlohmann::json merged = defaults.is_object() ? defaults
                                               : nlohmann::json::object();

  int threads = default_threads_from_env();

  if (!cli.config_path.empty()) {
    nlohmann::json file = parse_json_file(cli.config_path);
    if (!file.is_object())
      throw strm::ConfigError("config file must contain a JSON object");
    if (file.contains("experiment") &&
        file.at("experiment").get<std::string>() != experiment)
      throw strm::ConfigError("config file is for experiment '" +
                              file.at("experiment").get<std::string>() +
                              "', but '" + experiment + "' was requested");
    for (auto it = file.begin(); it != file.end(); ++it)
      merged[it.key()] = it.value();
  }

  if (merged.contains("threads")) {
    const int t = merged.at("threads").get<int>();
    if (t < 1) throw strm::ConfigError("threads must be >= 1");
    threads = t;
    merged.erase("threads");
  }

  if (cli.seed) merged["seed"] = *cli.seed;
  if (cli.replicates) merged["replicates"] = *cli.replicates;
  if (cli.adjacency) merged["adjacency"] = *cli.adjacency;
  if (cli.threads) {
    if (*cli.threads < 1) throw strm::ConfigError("threads must be >= 1");
    threads = *cli.threads;
  }
  merged["experiment"] = experiment;

  ExperimentConfig cfg;
  cfg.experiment = experiment;
  cfg.threads = threads;
  cfg.out_dir = cli.out_dir;
  if (cfg.out_dir.empty())
    throw strm::ConfigError("an output directory is required (--out)");

  if (merged.contains("params"))
    cfg.params = strm::ModelParams::from_json_text(merged.at("params").dump());
  if (merged.contains("levels")) {
    cfg.levels = merged.at("levels").get<int>();
    if (cfg.levels < 0) throw strm::ConfigError("levels must be >= 0");
  }
  if (merged.contains("replicates"))
    cfg.replicates = require_u64(merged, "replicates");
  if (merged.contains("seed")) cfg.seed = require_u64(merged, "seed");
  if (merged.contains("cap")) {
    cfg.cap = require_u64(merged, "cap");
    if (cfg.cap == 0) throw strm::ConfigError("cap must be >= 1");
  }
  if (merged.contains("adjacency"))
    cfg.adjacency =
        strm::adjacency_from_name(merged.at("adjacency").get<std::string>());
  if (merged.contains("sweep")) {
    const auto& sweep = merged.at("sweep");
    if (!sweep.is_object() || !sweep.contains("axis") ||
        !sweep.contains("values"))
      throw strm::ConfigError(
          "sweep must be an object with 'axis' and 'values'");
    cfg.sweep_axis = sweep.at("axis").get<std::string>();
    if (cfg.sweep_axis != "p" && cfg.sweep_axis != "c" &&
        cfg.sweep_axis != "mu")
      throw strm::ConfigError("sweep axis must be 'p', 'c' or 'mu'");
    for (const auto& v : sweep.at("values"))
      cfg.sweep_values.push_back(v.get<double>());
    if (cfg.sweep_values.empty())
      throw strm::ConfigError("sweep values must be non-empty");
  }

  cfg.effective = std::move(merged);
  return cfg;
}

}  // namespace strmlab
