#include "strm/sbm.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "strm/errors.hpp"
#include "strm/laws.hpp"

namespace strm {

std::vector<double> sample_branch_times(uint64_t k, double mu, Stream& s) {
  if (k <= 1) return {};
  if (!(mu > 1.0))
    throw ConfigError("sample_branch_times: k >= 2 needs mu > 1");
  std::vector<double> times(k - 1);
  for (double& v : times) {
    const double u = s.uniform();
    v = 1.0 - 1.0 / (1.0 + (mu - 1.0) * u);
  }
  std::sort(times.begin(), times.end());
  return times;
}

QkSample sample_qk(uint64_t k, double mu, int d, Stream& s) {
  if (k < 1) throw ConfigError("sample_qk: k must be >= 1");
  if (d < 1) throw ConfigError("sample_qk: d must be >= 1");
  if (!(mu >= 1.0)) throw ConfigError("sample_qk: mu must be >= 1");
  QkSample out;
  out.k = k;
  out.d = d;
  out.branch_times = sample_branch_times(k, mu, s);

  const double horizon = 1.0 - 1.0 / mu;
  std::vector<std::vector<double>> pts;
  pts.reserve(k);
  pts.push_back(std::vector<double>(static_cast<size_t>(d), 0.0));
  double t = 0.0;
  auto advance_all = [&](double dt) {
    if (dt <= 0.0) return;
    const double sd = std::sqrt(dt);
    for (auto& p : pts)
      for (double& x : p) x += sd * s.normal();
  };
  for (double v : out.branch_times) {
    advance_all(v - t);
    t = v;
    // Split: duplicate a uniformly chosen lineage endpoint.
    pts.push_back(pts[s.below(pts.size())]);
  }
  advance_all(horizon - t);

  const double scale = std::sqrt(mu);
  for (auto& p : pts)
    for (double& x : p) x *= scale;

  // Uniform output permutation (Fisher-Yates).
  for (size_t i = pts.size(); i > 1; --i)
    std::swap(pts[i - 1], pts[s.below(i)]);
  out.points = std::move(pts);
  return out;
}

std::vector<PointCloudGeneration> strm_free_run(double mu, int d,
                                                int generations,
                                                const Stream& run_stream,
                                                uint64_t cap) {
  if (!(mu >= 1.0)) throw ConfigError("strm_free_run: mu must be >= 1");
  if (d < 1) throw ConfigError("strm_free_run: d must be >= 1");
  if (generations < 0)
    throw ConfigError("strm_free_run: generations must be >= 0");
  const OffspringLaw law = OffspringLaw::geometric_mean(mu);
  const double rho = 1.0 / std::sqrt(mu);

  std::vector<PointCloudGeneration> out;
  out.reserve(static_cast<size_t>(generations) + 1);
  PointCloudGeneration root;
  root.d = d;
  root.positions.assign(static_cast<size_t>(d), 0.0);
  out.push_back(std::move(root));

  for (int g = 1; g <= generations; ++g) {
    const PointCloudGeneration& prev = out.back();
    PointCloudGeneration next;
    next.generation = g;
    next.d = d;
    next.weight = std::pow(mu, -static_cast<double>(g));
    const double scale = std::pow(rho, static_cast<double>(g));
    const uint64_t parents = prev.count();
    for (uint64_t pi = 0; pi < parents; ++pi) {
      Stream ps = run_stream.fork(static_cast<uint64_t>(g)).fork(pi);
      const uint64_t k = law.sample(ps);
      const QkSample q = sample_qk(k, mu, d, ps);
      const double* parent_pos =
          &prev.positions[static_cast<size_t>(pi) * static_cast<size_t>(d)];
      for (const auto& point : q.points) {
        if (next.count() >= cap)
          throw ResourceLimitError(
              "strm_free_run: generation " + std::to_string(g) +
              " exceeds the particle cap " + std::to_string(cap));
        for (int i = 0; i < d; ++i)
          next.positions.push_back(parent_pos[i] +
                                   scale * point[static_cast<size_t>(i)]);
      }
    }
    out.push_back(std::move(next));
  }
  return out;
}

Chi2Report validate_offspring_geometric(const std::vector<uint64_t>& samples,
                                        double mu) {
  if (!(mu > 1.0))
    throw ConfigError("validate_offspring_geometric: mu must be > 1");
  uint64_t kmax = 1;
  for (uint64_t v : samples) kmax = std::max(kmax, v);
  kmax = std::min<uint64_t>(kmax, 10000);

  // Bins 0..kmax; bin 0 has probability zero (support starts at 1), the
  // last bin carries the geometric tail mass.
  std::vector<uint64_t> observed(kmax + 1, 0);
  for (uint64_t v : samples) ++observed[std::min(v, kmax)];
  const double p1 = 1.0 / mu;
  const double ratio = 1.0 - p1;
  std::vector<double> probs(kmax + 1, 0.0);
  double pk = p1;  // P(Z = 1)
  for (uint64_t k = 1; k < kmax; ++k) {
    probs[k] = pk;
    pk *= ratio;
  }
  probs[kmax] = std::pow(ratio, static_cast<double>(kmax - 1));

  Chi2Report rep = chi2_goodness_of_fit(observed, probs);
  if (rep.samples < 10000) rep.low_power = true;
  return rep;
}

void export_csv(std::ostream& os, const PointCloudGeneration& cloud,
                bool header) {
  if (header) {
    os << "gen";
    for (int i = 1; i <= cloud.d; ++i) os << ",x_" << i;
    os << ",weight\n";
  }
  const uint64_t n = cloud.count();
  for (uint64_t p = 0; p < n; ++p) {
    os << cloud.generation;
    for (int i = 0; i < cloud.d; ++i)
      os << ','
         << cloud.positions[static_cast<size_t>(p) * static_cast<size_t>(cloud.d) +
                            static_cast<size_t>(i)];
    os << ',' << cloud.weight << '\n';
  }
}

}  // namespace strm
