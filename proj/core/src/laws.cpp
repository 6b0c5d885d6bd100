#include "strm/laws.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "strm/errors.hpp"

namespace strm {
namespace {

constexpr size_t kMaxTable = 10000;

// pgf evaluated from closed forms without the [0,1] domain clamp; needed by
// the finite-difference mean check, which steps to both sides of s = 1.
double pgf_extended(const OffspringLaw& law, double s) {
  switch (law.kind()) {
    case LawKind::kPoisson:
      return std::exp(law.mean() * (s - 1.0));
    case LawKind::kGeometricMean: {
      const double mu = law.mean();
      return s / (mu - (mu - 1.0) * s);
    }
    case LawKind::kBinomial: {
      const double p = law.binomial_p();
      return std::pow(1.0 - p + p * s, static_cast<double>(law.binomial_n()));
    }
    case LawKind::kDeterministic:
      return std::pow(s, static_cast<double>(law.deterministic_k()));
    case LawKind::kFiniteTable: {
      const auto& t = law.table();
      double acc = 0.0;
      for (size_t i = t.size(); i-- > 0;) acc = acc * s + t[i];
      return acc;
    }
  }
  return 0.0;
}

}  // namespace

OffspringLaw OffspringLaw::poisson(double mean) {
  if (!(mean >= 0.0) || !std::isfinite(mean))
    throw ConfigError("poisson law: mean must be finite and >= 0");
  OffspringLaw law;
  law.kind_ = LawKind::kPoisson;
  law.mean_ = mean;
  law.variance_ = mean;
  law.finalize_moments();
  return law;
}

OffspringLaw OffspringLaw::geometric_mean(double mean) {
  if (!(mean >= 1.0) || !std::isfinite(mean))
    throw ConfigError("geometric_mean law: mean must be >= 1");
  OffspringLaw law;
  law.kind_ = LawKind::kGeometricMean;
  law.mean_ = mean;
  law.variance_ = mean * mean - mean;
  law.finalize_moments();
  return law;
}

OffspringLaw OffspringLaw::binomial(uint32_t n, double p) {
  if (!(p >= 0.0 && p <= 1.0))
    throw ConfigError("binomial law: p must lie in [0,1]");
  OffspringLaw law;
  law.kind_ = LawKind::kBinomial;
  law.n_ = n;
  law.p_ = p;
  law.mean_ = static_cast<double>(n) * p;
  law.variance_ = static_cast<double>(n) * p * (1.0 - p);
  law.finalize_moments();
  return law;
}

OffspringLaw OffspringLaw::deterministic(uint32_t k) {
  OffspringLaw law;
  law.kind_ = LawKind::kDeterministic;
  law.n_ = k;
  law.mean_ = static_cast<double>(k);
  law.variance_ = 0.0;
  law.finalize_moments();
  return law;
}

OffspringLaw OffspringLaw::finite_table(std::vector<double> probs) {
  if (probs.empty() || probs.size() > kMaxTable + 1)
    throw ConfigError("finite_table law: need 1.." +
                      std::to_string(kMaxTable + 1) + " probabilities");
  double sum = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0) || !std::isfinite(p))
      throw ConfigError("finite_table law: probabilities must be >= 0");
    sum += p;
  }
  if (sum <= 0.0) throw ConfigError("finite_table law: zero total mass");
  for (double& p : probs) p /= sum;

  OffspringLaw law;
  law.kind_ = LawKind::kFiniteTable;
  law.table_ = std::move(probs);
  double mean = 0.0;
  double m2 = 0.0;
  for (size_t k = 0; k < law.table_.size(); ++k) {
    mean += static_cast<double>(k) * law.table_[k];
    m2 += static_cast<double>(k) * static_cast<double>(k) * law.table_[k];
  }
  law.mean_ = mean;
  law.variance_ = m2 - mean * mean;
  law.cum_table_.resize(law.table_.size());
  double acc = 0.0;
  for (size_t k = 0; k < law.table_.size(); ++k) {
    acc += law.table_[k];
    law.cum_table_[k] = acc;
  }
  law.cum_table_.back() = 1.0;
  law.finalize_moments();
  return law;
}

void OffspringLaw::finalize_moments() {
  // Richardson-extrapolated central difference of the pgf at s = 1; errors
  // here mean the closed forms and the analytic moments disagree, which is a
  // construction bug, not a user input problem.
  const double h = 1e-4;
  const auto diff = [this](double hh) {
    return (pgf_extended(*this, 1.0 + hh) - pgf_extended(*this, 1.0 - hh)) /
           (2.0 * hh);
  };
  const double d = (4.0 * diff(h / 2.0) - diff(h)) / 3.0;
  if (std::fabs(d - mean_) > 1e-9 * std::max(1.0, mean_))
    throw std::logic_error("offspring law: pgf derivative check failed");
}

double OffspringLaw::pgf(double s) const {
  if (!(s >= 0.0 && s <= 1.0))
    throw std::domain_error("pgf: s must lie in [0,1]");
  return pgf_extended(*this, s);
}

double OffspringLaw::survival_map(double s) const {
  switch (kind_) {
    case LawKind::kPoisson:
      return -std::expm1(-mean_ * s);
    case LawKind::kGeometricMean:
      return mean_ * s / (1.0 + (mean_ - 1.0) * s);
    case LawKind::kBinomial:
      return -std::expm1(static_cast<double>(n_) * std::log1p(-p_ * s));
    case LawKind::kDeterministic:
      if (n_ == 0) return 0.0;
      return -std::expm1(static_cast<double>(n_) * std::log1p(-s));
    case LawKind::kFiniteTable: {
      // g(s) = sum_k p_k (1 - (1-s)^k), each term evaluated stably;
      // compensated summation keeps absolute error at the ulp level even
      // when s is ~1e-300 and thousands of terms are accumulated.
      double sum = 0.0;
      double comp = 0.0;
      for (size_t k = 1; k < table_.size(); ++k) {
        const double term =
            table_[k] *
            (-std::expm1(static_cast<double>(k) * std::log1p(-s)));
        const double y = term - comp;
        const double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
      }
      return sum;
    }
  }
  return 0.0;
}

double OffspringLaw::thinned_pgf(double p, double s) const {
  if (!(p > 0.0 && p <= 1.0))
    throw std::domain_error("thinned_pgf: p must lie in (0,1]");
  if (!(s >= 0.0 && s <= 1.0))
    throw std::domain_error("thinned_pgf: s must lie in [0,1]");
  return pgf_extended(*this, 1.0 - p + p * s);
}

double OffspringLaw::thinned_survival_map(double p, double s) const {
  return survival_map(p * s);
}

double OffspringLaw::thinned_variance(double p) const {
  return p * (1.0 - p) * mean_ + p * p * variance_;
}

OffspringLaw OffspringLaw::size_biased() const {
  if (!(mean_ > 0.0))
    throw ConfigError("size_biased: law has mean 0");
  if (kind_ == LawKind::kDeterministic) return deterministic(n_);
  if (kind_ == LawKind::kBinomial && p_ >= 1.0) return deterministic(n_);

  // Generic path: tabulate q_k = k p_k / mu until the captured mass reaches
  // 1 - 1e-15 (finite kinds just run out of support).
  std::vector<double> q;
  double captured = 0.0;
  double pk = 0.0;
  for (size_t k = 0; k <= kMaxTable; ++k) {
    switch (kind_) {
      case LawKind::kPoisson:
        pk = (k == 0) ? std::exp(-mean_)
                      : pk * mean_ / static_cast<double>(k);
        break;
      case LawKind::kGeometricMean:
        pk = (k == 0) ? 0.0
             : (k == 1)
                 ? 1.0 / mean_
                 : pk * (1.0 - 1.0 / mean_);
        break;
      case LawKind::kBinomial: {
        // Direct log-space pmf; the multiplicative recurrence is unstable
        // for p near 1.
        if (k > n_) {
          pk = 0.0;
          break;
        }
        const double dn = static_cast<double>(n_);
        const double dk = static_cast<double>(k);
        pk = std::exp(std::lgamma(dn + 1.0) - std::lgamma(dk + 1.0) -
                      std::lgamma(dn - dk + 1.0) + dk * std::log(p_) +
                      (dn - dk) * std::log1p(-p_));
        break;
      }
      case LawKind::kFiniteTable:
        pk = (k < table_.size()) ? table_[k] : 0.0;
        break;
      case LawKind::kDeterministic:
        break;  // handled above
    }
    q.push_back(static_cast<double>(k) * pk / mean_);
    captured += q.back();
    if (captured >= 1.0 - 1e-15 || k >= max_support()) break;
  }
  return finite_table(std::move(q));
}

uint64_t OffspringLaw::sample(Stream& s) const {
  switch (kind_) {
    case LawKind::kPoisson:
      return poisson_draw(s, mean_);
    case LawKind::kGeometricMean: {
      if (mean_ <= 1.0) return 1;
      const double u = s.uniform();
      return 1 + static_cast<uint64_t>(
                     std::floor(std::log(u) / std::log(1.0 - 1.0 / mean_)));
    }
    case LawKind::kBinomial:
      return binomial_draw(s, n_, p_);
    case LawKind::kDeterministic:
      return n_;
    case LawKind::kFiniteTable: {
      const double u = s.uniform();
      const auto it =
          std::upper_bound(cum_table_.begin(), cum_table_.end(), u);
      return static_cast<uint64_t>(it - cum_table_.begin());
    }
  }
  return 0;
}

uint64_t OffspringLaw::max_support() const {
  switch (kind_) {
    case LawKind::kPoisson:
    case LawKind::kGeometricMean:
      return UINT64_MAX;
    case LawKind::kBinomial:
      return n_;
    case LawKind::kDeterministic:
      return n_;
    case LawKind::kFiniteTable:
      return table_.size() - 1;
  }
  return 0;
}

OffspringLaw OffspringLaw::from_json_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("law JSON parse error: ") + e.what());
  }
  try {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "poisson") return poisson(j.at("mean").get<double>());
    if (kind == "geometric_mean")
      return geometric_mean(j.at("mean").get<double>());
    if (kind == "binomial")
      return binomial(j.at("n").get<uint32_t>(), j.at("p").get<double>());
    if (kind == "deterministic")
      return deterministic(j.at("k").get<uint32_t>());
    if (kind == "finite_table")
      return finite_table(j.at("probs").get<std::vector<double>>());
    throw ConfigError("unknown law kind: " + kind);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("law JSON field error: ") + e.what());
  }
}

std::string OffspringLaw::to_json_text() const {
  nlohmann::json j;
  switch (kind_) {
    case LawKind::kPoisson:
      j = {{"kind", "poisson"}, {"mean", mean_}};
      break;
    case LawKind::kGeometricMean:
      j = {{"kind", "geometric_mean"}, {"mean", mean_}};
      break;
    case LawKind::kBinomial:
      j = {{"kind", "binomial"}, {"n", n_}, {"p", p_}};
      break;
    case LawKind::kDeterministic:
      j = {{"kind", "deterministic"}, {"k", n_}};
      break;
    case LawKind::kFiniteTable:
      j = {{"kind", "finite_table"}, {"probs", table_}};
      break;
  }
  return j.dump();
}

std::string OffspringLaw::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case LawKind::kPoisson:
      os << "poisson(mean=" << mean_ << ")";
      break;
    case LawKind::kGeometricMean:
      os << "geometric_mean(mean=" << mean_ << ")";
      break;
    case LawKind::kBinomial:
      os << "binomial(n=" << n_ << ",p=" << p_ << ")";
      break;
    case LawKind::kDeterministic:
      os << "deterministic(k=" << n_ << ")";
      break;
    case LawKind::kFiniteTable:
      os << "finite_table(K=" << table_.size() - 1 << ",mean=" << mean_ << ")";
      break;
  }
  return os.str();
}

uint64_t sample_size_biased(const OffspringLaw& law, Stream& s) {
  switch (law.kind()) {
    case LawKind::kPoisson:
      return 1 + poisson_draw(s, law.mean());
    case LawKind::kBinomial:
      // Z* = 1 + Binomial(n-1, p): pick-a-child identity for binomials.
      if (law.binomial_n() == 0)
        throw ConfigError("sample_size_biased: law has mean 0");
      return 1 + binomial_draw(s, law.binomial_n() - 1, law.binomial_p());
    case LawKind::kGeometricMean: {
      // q_k proportional to k (1-1/mu)^(k-1) is the law of G1 + G2 - 1 for
      // independent geometrics with success probability 1/mu.
      const double mu = law.mean();
      if (mu <= 1.0) return 1;
      const double lg = std::log(1.0 - 1.0 / mu);
      const uint64_t g1 =
          1 + static_cast<uint64_t>(std::floor(std::log(s.uniform()) / lg));
      const uint64_t g2 =
          1 + static_cast<uint64_t>(std::floor(std::log(s.uniform()) / lg));
      return g1 + g2 - 1;
    }
    case LawKind::kDeterministic:
      if (law.deterministic_k() == 0)
        throw ConfigError("sample_size_biased: law has mean 0");
      return law.deterministic_k();
    case LawKind::kFiniteTable:
      return law.size_biased().sample(s);
  }
  return 0;
}

uint64_t sample_digit_index(int d, int B, Stream& s) {
  uint64_t n = 1;
  for (int i = 0; i < d; ++i) n *= static_cast<uint64_t>(B);
  return s.below(n);
}

std::vector<uint32_t> unpack_digits(uint64_t digit_index, int d, int B) {
  std::vector<uint32_t> g(static_cast<size_t>(d));
  for (int i = 0; i < d; ++i) {
    g[static_cast<size_t>(i)] =
        static_cast<uint32_t>(digit_index % static_cast<uint64_t>(B));
    digit_index /= static_cast<uint64_t>(B);
  }
  return g;
}

std::vector<uint64_t> sample_distinct_sites(uint64_t k, int d, int B,
                                            Stream& s) {
  uint64_t n = 1;
  for (int i = 0; i < d; ++i) n *= static_cast<uint64_t>(B);
  if (k > n)
    throw ConfigError("sample_distinct_sites: k exceeds the number of sites");
  // Floyd's subset sampling, then a Fisher-Yates shuffle so the output order
  // carries no information (marginals identical across positions).
  std::vector<uint64_t> out;
  out.reserve(k);
  for (uint64_t j = n - k; j < n; ++j) {
    const uint64_t t = s.below(j + 1);
    if (std::find(out.begin(), out.end(), t) != out.end())
      out.push_back(j);
    else
      out.push_back(t);
  }
  for (size_t i = out.size(); i > 1; --i)
    std::swap(out[i - 1], out[s.below(i)]);
  return out;
}

double pgf_mean_by_difference(const OffspringLaw& law, double h) {
  return (pgf_extended(law, 1.0 + h) - pgf_extended(law, 1.0 - h)) / (2.0 * h);
}

}  // namespace strm
