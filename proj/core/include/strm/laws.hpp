#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "strm/rng.hpp"

namespace strm {

enum class LawKind {
  kPoisson,        // Poisson(mean)
  kGeometricMean,  // support {1,2,...}, P(Z=k) = (1/mu)(1-1/mu)^(k-1)
  kBinomial,       // Binomial(n, p)
  kDeterministic,  // point mass at k
  kFiniteTable,    // explicit p_0..p_K, K <= 10^4, renormalized
};

// Offspring law with exact generating-function access.
//
// Immutable after construction and safely shareable across threads.  Closed
// forms are used for every kind except FiniteTable, which evaluates its pgf
// by Horner and its survival map by compensated summation; the survival map
// g(s) = 1 - pgf(1 - s) is provided in a cancellation-free form so that deep
// iteration near s = 0 keeps full absolute precision.
//
// Construction does not require mean > 1: sub- and degenerate laws are legal
// inputs for extinction-side experiments (a table with p_0 = 1 models
// immediate extinction).  Operations that only make sense for supercritical
// laws enforce the mean themselves.
class OffspringLaw {
 public:
  static OffspringLaw poisson(double mean);
  static OffspringLaw geometric_mean(double mean);  // requires mean >= 1
  static OffspringLaw binomial(uint32_t n, double p);
  static OffspringLaw deterministic(uint32_t k);
  static OffspringLaw finite_table(std::vector<double> probs);

  LawKind kind() const { return kind_; }
  double mean() const { return mean_; }
  double variance() const { return variance_; }

  // E[s^Z] for s in [0,1]; throws std::domain_error outside.
  double pgf(double s) const;

  // Survival map g(s) = 1 - pgf(1-s), evaluated without forming 1-s
  // cancellation: for s near 0 the result is accurate in absolute terms,
  // which is what iterated survival probabilities need.
  double survival_map(double s) const;

  // Bernoulli(p)-thinned offspring R = sum of Z independent Bernoulli(p).
  // E[s^R] = pgf(1 - p + p s); survival map of R is g(p s).
  double thinned_pgf(double p, double s) const;
  double thinned_survival_map(double p, double s) const;
  double thinned_mean(double p) const { return p * mean_; }
  // Exact: Var(R) = p(1-p) mu + p^2 Var(Z).
  double thinned_variance(double p) const;

  // Law of Z* with P(Z* = k) proportional to k P(Z = k).  Deterministic maps
  // to itself; every other kind returns a FiniteTable truncated at relative
  // tail mass < 1e-15.  Requires mean > 0.
  OffspringLaw size_biased() const;

  uint64_t sample(Stream& s) const;

  // Maximum support value, or UINT64_MAX for unbounded kinds.
  uint64_t max_support() const;

  // For FiniteTable: the probabilities; empty for closed-form kinds.
  const std::vector<double>& table() const { return table_; }

  // Parameter accessors for the closed-form kinds.
  uint32_t binomial_n() const { return n_; }
  double binomial_p() const { return p_; }
  uint32_t deterministic_k() const { return n_; }

  // JSON grammar: {"kind":"poisson","mean":4.0},
  // {"kind":"geometric_mean","mean":2.0}, {"kind":"binomial","n":4,"p":0.5},
  // {"kind":"deterministic","k":1}, {"kind":"finite_table","probs":[...]}.
  static OffspringLaw from_json_text(const std::string& text);
  std::string to_json_text() const;

  std::string describe() const;

 private:
  OffspringLaw() = default;
  void finalize_moments();  // also numerically cross-checks pgf'(1) vs mean

  LawKind kind_ = LawKind::kDeterministic;
  double mean_ = 0.0;
  double variance_ = 0.0;
  double p_ = 0.0;   // binomial success probability
  uint32_t n_ = 0;   // binomial n / deterministic k
  std::vector<double> table_;      // finite table pmf
  std::vector<double> cum_table_;  // its cdf, for sampling
};

// Draw from the size-biased law directly using closed forms where they
// exist: Poisson(mu) -> 1 + Poisson(mu), Binomial(n,p) -> 1 + Binomial(n-1,p),
// GeometricMean(mu) -> G1 + G2 - 1 with independent geometric G_i,
// Deterministic(k) -> k.  FiniteTable falls back to the size_biased() table.
// Agrees in law with law.size_biased().sample() (checked by test).
uint64_t sample_size_biased(const OffspringLaw& law, Stream& s);

// Uniform digit vector on {0,...,B-1}^d, returned as the packed index
// sum_i g_i * B^i in [0, B^d).
uint64_t sample_digit_index(int d, int B, Stream& s);

// Decode a packed digit index into its d digits.
std::vector<uint32_t> unpack_digits(uint64_t digit_index, int d, int B);

// k distinct sites of {0,...,B-1}^d, uniformly among all k-subsets, in
// random order (Floyd's algorithm + permutation).  Each single marginal is
// uniform on the full site set.
std::vector<uint64_t> sample_distinct_sites(uint64_t k, int d, int B,
                                            Stream& s);

// Central-difference check of pgf'(1) against the analytic mean, stepping to
// both sides of 1 via the closed forms (the public pgf clamps its domain).
double pgf_mean_by_difference(const OffspringLaw& law, double h = 1e-5);

}  // namespace strm
