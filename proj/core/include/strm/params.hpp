#pragma once

#include <cstdint>
#include <string>

#include "strm/laws.hpp"

namespace strm {

enum class Regime { kCritical, kSubcritical, kSupercriticalSpatial };

// Model parameters for the grid process and its free-displacement variant.
//
// In grid mode the displacement ratio is rho = 1/B and the derived
// quantities are
//   beta = 2 ln B / ln mu       (only defined for mu > 1)
//   c    = mu / B^d = B^(2/beta - d)   (the per-subcell thinned mean)
// Both expressions for c are computed and must agree to 1e-12; the regime is
//   critical      iff mu = B^d
//   subcritical   iff mu < B^d
//   supercritical (spatially) iff mu > B^d.
//
// Laws with mean <= 1 are accepted (beta is NaN then) so extinction-side
// experiments can run; anything needing beta checks for itself.
struct ModelParams {
  int d = 1;
  int B = 2;
  OffspringLaw offspring = OffspringLaw::deterministic(2);
  bool grid_mode = true;
  double beta = 0.0;  // NaN when mean <= 1
  double rho = 0.0;
  double c = 0.0;     // mu * B^-d (grid mode)

  static ModelParams grid(int B, int d, OffspringLaw offspring);

  // Free mode: rho = mu^(-beta/2) with beta = 1 (the continuum bridge's
  // parameterization), displacements off-grid.
  static ModelParams free_mode(double mu, int d);

  double mu() const { return offspring.mean(); }
  double bd() const;           // B^d as a double
  uint64_t bd_u64() const;     // B^d as an integer
  Regime regime() const;
  std::string regime_name() const;

  static ModelParams from_json_text(const std::string& text);
  std::string to_json_text() const;
};

}  // namespace strm
