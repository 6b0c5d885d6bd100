#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "artifacts.hpp"
#include "experiments.hpp"
#include "strm/errors.hpp"
#include "strm/laws.hpp"
#include "strm/parallel.hpp"
#include "strm/sbm.hpp"
#include "strm/stats.hpp"
#include "suites.hpp"

namespace strmlab::suite {

namespace {

using nlohmann::json;
using strm::Stream;

json ks_entry(const strm::KsResult& ks, double threshold) {
  json e;
  e["statistic"] = ks.statistic;
  e["p_value"] = ks.p_value;
  e["n"] = ks.n;
  e["pass"] = ks.p_value > threshold;
  return e;
}

}  // namespace

json sbm_validate_defaults() {
  json d;
  d["params"] =
      json::parse(strm::ModelParams::free_mode(1.5, 2).to_json_text());
  d["qk_k"] = 3;
  d["qk_mu"] = 4.0;
  d["qk_samples"] = 10000;
  d["free_generations"] = 20;
  d["free_runs"] = 4000;
  d["offspring_draws"] = 100000;
  d["replicates"] = 1;
  d["seed"] = 20260823;
  d["p_threshold"] = 0.01;
  return d;
}

json sbm_validate_run(const ExperimentConfig& cfg) {
  const auto k = cfg.extra_u64("qk_k", 3);
  const double qmu = cfg.extra_number("qk_mu", 4.0);
  const auto qk_samples = cfg.extra_u64("qk_samples", 10000);
  const int free_gens = cfg.extra_int("free_generations", 20);
  const auto free_runs = cfg.extra_u64("free_runs", 4000);
  const auto offspring_draws = cfg.extra_u64("offspring_draws", 100000);
  const double thr = cfg.extra_number("p_threshold", 0.01);
  const int d_dim = cfg.params.d;
  const double fmu = cfg.params.mu();
  if (k < 2 || !(qmu > 1.0))
    throw strm::ConfigError("sbm-validate: need qk_k >= 2 and qk_mu > 1");
  if (free_gens < 1 || !(fmu > 1.0))
    throw strm::ConfigError(
        "sbm-validate: need free_generations >= 1 and free-mode mu > 1");

  const Stream base = Stream::root(cfg.seed).fork(strm::tag::kSbm);
  json results;

  // --- Sibling displacement family: marginals, exchangeability, covariance.
  {
    Stream qs = base.fork(0);
    CsvFile points_csv(out_path(cfg, "qk_points.csv"),
                       {"sample", "point", "coordinate", "value"});
    CsvFile times_csv(out_path(cfg, "branch_times.csv"),
                      {"sample", "index", "time"});
    const double sd = std::sqrt(qmu - 1.0);
    std::vector<double> std_first;   // all coordinates of point 0, scaled
    std::vector<double> first_c0, last_c0;
    std::vector<double> times;
    for (uint64_t s = 0; s < qk_samples; ++s) {
      const auto q = strm::sample_qk(k, qmu, d_dim, qs);
      for (uint64_t pidx = 0; pidx < k; ++pidx)
        for (int c = 0; c < d_dim; ++c)
          points_csv.row(s, pidx, c, q.points[pidx][c]);
      for (size_t i = 0; i < q.branch_times.size(); ++i) {
        times_csv.row(s, i, q.branch_times[i]);
        times.push_back(q.branch_times[i]);
      }
      for (int c = 0; c < d_dim; ++c) std_first.push_back(q.points[0][c] / sd);
      first_c0.push_back(q.points[0][0]);
      last_c0.push_back(q.points[k - 1][0]);
    }
    // The closed-form pair covariance mu (1 - ln mu / (mu - 1)) is the
    // k = 2 case (the pair separates at a single branch time); larger
    // families split progressively and a random pair separates earlier.
    strm::RunningStats cov_prod;
    {
      Stream cs = base.fork(4);
      for (uint64_t s = 0; s < qk_samples; ++s) {
        const auto q = strm::sample_qk(2, qmu, d_dim, cs);
        for (int c = 0; c < d_dim; ++c)
          cov_prod.add(q.points[0][c] * q.points[1][c]);
      }
    }

    const auto marginal =
        strm::ks_test(std_first, [](double x) { return strm::normal_cdf(x); });
    const auto exchangeable = strm::ks_two_sample(first_c0, last_c0);
    // Branch-time law: density (1-v)^-2 / (mu-1) on [0, 1-1/mu].
    const auto time_ks = strm::ks_test(times, [qmu](double v) {
      const double f = v / ((1.0 - v) * (qmu - 1.0));
      return std::clamp(f, 0.0, 1.0);
    });
    const double cov_exact =
        qmu * (1.0 - std::log(qmu) / (qmu - 1.0));

    json qk;
    qk["k"] = k;
    qk["mu"] = qmu;
    qk["samples"] = qk_samples;
    qk["marginal_ks"] = ks_entry(marginal, thr);
    qk["exchangeable_ks"] = ks_entry(exchangeable, thr);
    qk["branch_time_ks"] = ks_entry(time_ks, thr);
    json cov = mean_entry(cov_prod.mean(), cov_prod.stderr_mean(),
                          cov_prod.count());
    cov["k"] = 2;
    cov["exact"] = cov_exact;
    cov["in_band"] =
        std::fabs(cov_prod.mean() - cov_exact) <= 3.0 * cov_prod.stderr_mean();
    qk["pair_covariance"] = std::move(cov);
    // Median of the branch-time law: (mu-1)/(mu+1).
    std::sort(times.begin(), times.end());
    qk["branch_time_median"] = times.empty() ? 0.0 : times[times.size() / 2];
    qk["branch_time_median_exact"] = (qmu - 1.0) / (qmu + 1.0);
    results["qk"] = std::move(qk);
  }

  // --- Free-mode positions: one uniformly chosen generation-G particle per
  // run is exactly N(0, (1 - mu^-G) I) per coordinate.
  {
    const Stream fbase = base.fork(1);
    const Stream pick_base = base.fork(2);
    const double exact_var = 1.0 - std::pow(fmu, -free_gens);
    struct FreeRec {
      uint64_t population = 0;
      double position = 0.0;
    };
    auto recs = strm::parallel_map(
        free_runs, cfg.threads, [&](uint64_t r) {
          const auto run = strm::strm_free_run(fmu, d_dim, free_gens,
                                               fbase.fork(r), cfg.cap);
          const auto& final_gen = run.back();
          Stream pick = pick_base.fork(r);
          const uint64_t idx = pick.below(final_gen.count());
          FreeRec rec;
          rec.population = final_gen.count();
          rec.position = final_gen.positions[idx * d_dim];
          return rec;
        });

    CsvFile free_csv(out_path(cfg, "freerun.csv"),
                     {"replicate", "population", "sampled_position"});
    std::vector<double> standardized;
    strm::RunningStats pop;
    for (uint64_t r = 0; r < free_runs; ++r) {
      free_csv.row(r, recs[r].population, recs[r].position);
      standardized.push_back(recs[r].position / std::sqrt(exact_var));
      pop.add(static_cast<double>(recs[r].population));
    }
    const auto pos_ks = strm::ks_test(
        standardized, [](double x) { return strm::normal_cdf(x); });

    json fr;
    fr["mu"] = fmu;
    fr["generations"] = free_gens;
    fr["runs"] = free_runs;
    fr["exact_variance"] = exact_var;
    fr["position_ks"] = ks_entry(pos_ks, thr);
    fr["mean_population"] = pop.mean();
    fr["expected_population"] = std::pow(fmu, free_gens);
    results["free_run"] = std::move(fr);
  }

  // --- Offspring sampler against the geometric pmf it claims to implement.
  {
    Stream os = base.fork(3);
    const auto law = strm::OffspringLaw::geometric_mean(fmu);
    std::vector<uint64_t> draws(offspring_draws);
    std::map<uint64_t, uint64_t> hist;
    for (auto& v : draws) {
      v = law.sample(os);
      ++hist[v];
    }
    CsvFile off_csv(out_path(cfg, "offspring.csv"), {"value", "count"});
    for (const auto& [value, count] : hist) off_csv.row(value, count);
    const auto chi2 = strm::validate_offspring_geometric(draws, fmu);

    json off;
    off["draws"] = offspring_draws;
    off["statistic"] = chi2.statistic;
    off["dof"] = chi2.dof;
    off["p_value"] = chi2.p_value;
    off["low_power"] = chi2.low_power;
    off["pass"] = chi2.p_value > thr;
    results["offspring"] = std::move(off);
  }

  results["p_threshold"] = thr;
  results["all_pass"] = results["qk"]["marginal_ks"]["pass"].get<bool>() &&
                        results["qk"]["exchangeable_ks"]["pass"].get<bool>() &&
                        results["qk"]["branch_time_ks"]["pass"].get<bool>() &&
                        results["qk"]["pair_covariance"]["in_band"].get<bool>() &&
                        results["free_run"]["position_ks"]["pass"].get<bool>() &&
                        results["offspring"]["pass"].get<bool>();
  return results;
}

}  // namespace strmlab::suite
