#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "config.hpp"
#include "experiments.hpp"
#include "strm/errors.hpp"

namespace {

void print_usage(std::FILE* to) {
  std::fprintf(to,
               "usage: strmlab <experiment> --out <dir> [--config <file.json>]"
               " [--seed <u64>]\n"
               "               [--replicates <n>] [--threads <n>]"
               " [--adjacency face|edge|closedcube]\n"
               "       strmlab list | --help | --version\n\n"
               "experiments:\n");
  for (const auto& s : strmlab::suites())
    std::fprintf(to, "  %-22s %s\n", s.name, s.blurb);
  std::fprintf(to,
               "\nOutputs summary.json, manifest.json, timing.json and CSV "
               "artifacts under --out.\n"
               "Unset options fall back to the config file, then to the "
               "suite defaults\n"
               "(threads also reads STRMLAB_THREADS).  Exit codes: 0 ok, "
               "2 invalid config,\n"
               "3 resource limit exceeded, 5 unknown experiment.\n");
}

int run_cli(int argc, char** argv) {
  if (argc < 2) {
    print_usage(stderr);
    return 2;
  }
  const std::string first = argv[1];
  if (first == "--help" || first == "-h" || first == "help") {
    print_usage(stdout);
    return 0;
  }
  if (first == "--version") {
    std::printf("%s\n", strmlab::kToolVersion);
    return 0;
  }
  if (first == "list") {
    for (const auto& s : strmlab::suites())
      std::printf("%-22s %s\n", s.name, s.blurb);
    return 0;
  }
  if (!first.empty() && first[0] == '-') {
    print_usage(stderr);
    return 2;
  }
  const strmlab::SuiteInfo* info = strmlab::find_suite(first);
  if (info == nullptr) {
    std::fprintf(stderr, "strmlab: unknown experiment '%s'\navailable:",
                 first.c_str());
    for (const auto& s : strmlab::suites())
      std::fprintf(stderr, " %s", s.name);
    std::fprintf(stderr, "\n");
    return 5;
  }

  CLI::App app{info->blurb};
  app.name(std::string("strmlab ") + info->name);
  std::string config_path, out_dir, adjacency;
  uint64_t seed = 0, replicates = 0;
  int threads = 0;
  app.add_option("--config", config_path, "JSON config file");
  auto* seed_opt = app.add_option("--seed", seed, "RNG root seed");
  auto* rep_opt =
      app.add_option("--replicates", replicates, "independent replicates");
  app.add_option("--out", out_dir, "output directory")->required();
  auto* thr_opt = app.add_option("--threads", threads, "worker threads");
  auto* adj_opt = app.add_option("--adjacency", adjacency,
                                 "cell adjacency: face, edge or closedcube");
  try {
    app.parse(argc - 1, argv + 1);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  strmlab::CliOverrides cli;
  cli.config_path = config_path;
  cli.out_dir = out_dir;
  if (seed_opt->count() > 0) cli.seed = seed;
  if (rep_opt->count() > 0) cli.replicates = replicates;
  if (thr_opt->count() > 0) cli.threads = threads;
  if (adj_opt->count() > 0) cli.adjacency = adjacency;

  const auto cfg = strmlab::resolve_config(first, info->defaults(), cli);
  strmlab::run_experiment(cfg);
  std::printf("%s: seed %llu, %llu replicates, config %s\n", info->name,
              static_cast<unsigned long long>(cfg.seed),
              static_cast<unsigned long long>(cfg.replicates),
              cfg.config_hash_hex().c_str());
  std::printf("wrote %s/summary.json\n", cfg.out_dir.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_cli(argc, argv);
  } catch (const strm::ConfigError& e) {
    std::fprintf(stderr, "strmlab: config error: %s\n", e.what());
    return 2;
  } catch (const strm::ResourceLimitError& e) {
    std::fprintf(stderr, "strmlab: resource limit: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "strmlab: error: %s\n", e.what());
    return 1;
  }
}
