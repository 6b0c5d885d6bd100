#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <string>

#include "config.hpp"
#include "doctest.h"
#include "strm/connectivity.hpp"
#include "strm/errors.hpp"

using nlohmann::json;
using strmlab::CliOverrides;
using strmlab::resolve_config;

namespace {

struct TempJson {
  std::filesystem::path path;
  explicit TempJson(const json& doc) {
    path = std::filesystem::temp_directory_path() /
           ("strm_test_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter()++) + ".json");
    std::ofstream out(path);
    out << doc.dump();
  }
  ~TempJson() { std::filesystem::remove(path); }
  static int& counter() {
    static int c = 0;
    return c;
  }
};

json base_defaults() {
  return json{{"levels", 8},
              {"replicates", 100},
              {"seed", 1},
              {"params",
               {{"B", 2},
                {"d", 2},
                {"mode", "grid"},
                {"offspring", {{"kind", "poisson"}, {"mean", 4.0}}}}}};
}

}  // namespace

TEST_SUITE("config") {

TEST_CASE("defaults, file and flags layer in that order") {
  TempJson file(json{{"experiment", "survival"}, {"levels", 12}, {"seed", 9}});
  CliOverrides cli;
  cli.config_path = file.path.string();
  cli.seed = 5;
  cli.out_dir = "unused_out";
  auto cfg = resolve_config("survival", base_defaults(), cli);
  CHECK(cfg.levels == 12);       // file overrides default
  CHECK(cfg.seed == 5);          // flag overrides file
  CHECK(cfg.replicates == 100);  // default survives
  CHECK(cfg.experiment == "survival");
  CHECK(cfg.params.B == 2);
  CHECK(cfg.params.d == 2);
}

TEST_CASE("file seed wins over the default when no flag is given") {
  TempJson file(json{{"experiment", "survival"}, {"seed", 9}});
  CliOverrides cli;
  cli.config_path = file.path.string();
  cli.out_dir = "unused_out";
  auto cfg = resolve_config("survival", base_defaults(), cli);
  CHECK(cfg.seed == 9);
}

TEST_CASE("a config file written for another experiment is rejected") {
  TempJson file(json{{"experiment", "crossing-sweep"}});
  CliOverrides cli;
  cli.config_path = file.path.string();
  cli.out_dir = "unused_out";
  CHECK_THROWS_AS(resolve_config("survival", base_defaults(), cli),
                  strm::ConfigError);
}

TEST_CASE("the configuration hash ignores output directory and threads") {
  CliOverrides a;
  a.out_dir = "out_a";
  auto cfg_a = resolve_config("survival", base_defaults(), a);

  CliOverrides b;
  b.out_dir = "somewhere_else";
  b.threads = 4;
  auto cfg_b = resolve_config("survival", base_defaults(), b);
  CHECK(cfg_a.config_hash_hex() == cfg_b.config_hash_hex());
  CHECK(cfg_b.threads == 4);

  CliOverrides c;
  c.out_dir = "out_a";
  c.replicates = 999;
  auto cfg_c = resolve_config("survival", base_defaults(), c);
  CHECK(cfg_a.config_hash_hex() != cfg_c.config_hash_hex());
  CHECK(cfg_a.config_hash_hex().rfind("fnv1a64:", 0) == 0);
}

TEST_CASE("malformed inputs raise configuration errors") {
  CliOverrides no_out;
  CHECK_THROWS_AS(resolve_config("survival", base_defaults(), no_out),
                  strm::ConfigError);

  json bad_params = base_defaults();
  bad_params["params"]["offspring"] = {{"law", "poisson"}, {"mean", 4.0}};
  CliOverrides cli;
  cli.out_dir = "unused_out";
  CHECK_THROWS_AS(resolve_config("survival", bad_params, cli),
                  strm::ConfigError);

  json bad_sweep = base_defaults();
  bad_sweep["sweep"] = {{"axis", "q"}, {"values", {0.5}}};
  CHECK_THROWS_AS(resolve_config("survival", bad_sweep, cli),
                  strm::ConfigError);

  json bad_levels = base_defaults();
  bad_levels["levels"] = -3;
  CHECK_THROWS_AS(resolve_config("survival", bad_levels, cli),
                  strm::ConfigError);
}

TEST_CASE("adjacency and sweep are parsed into typed fields") {
  json defaults = base_defaults();
  defaults["sweep"] = {{"axis", "p"}, {"values", {0.4, 0.5, 0.7}}};
  CliOverrides cli;
  cli.out_dir = "unused_out";
  cli.adjacency = "closedcube";
  auto cfg = resolve_config("crossing-sweep", defaults, cli);
  CHECK(cfg.adjacency == strm::AdjacencyMode::kClosedCube);
  CHECK(cfg.sweep_axis == "p");
  REQUIRE(cfg.sweep_values.size() == 3);
  CHECK(cfg.sweep_values[1] == doctest::Approx(0.5));

  cli.adjacency = "hexagonal";
  CHECK_THROWS_AS(resolve_config("crossing-sweep", defaults, cli),
                  strm::ConfigError);
}

TEST_CASE("typed extras fall back and type-check") {
  CliOverrides cli;
  cli.out_dir = "unused_out";
  json defaults = base_defaults();
  defaults["band_z"] = 3.0;
  defaults["ells"] = {0, 1, 2};
  auto cfg = resolve_config("survival", defaults, cli);
  CHECK(cfg.extra_number("band_z", 1.96) == doctest::Approx(3.0));
  CHECK(cfg.extra_number("missing", 1.96) == doctest::Approx(1.96));
  CHECK(cfg.extra_ints("ells", {}).size() == 3);
  CHECK(cfg.extra_bool("missing_flag", true));
  CHECK_THROWS_AS(cfg.extra_int("band_z", 0), strm::ConfigError);
}

}  // TEST_SUITE
