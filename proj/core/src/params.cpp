#include "strm/params.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "json.hpp"
#include "strm/errors.hpp"

namespace strm {

ModelParams ModelParams::grid(int B, int d, OffspringLaw offspring) {
  if (B < 2) throw ConfigError("ModelParams: B must be >= 2");
  if (d < 1) throw ConfigError("ModelParams: d must be >= 1");
  if (d * std::log2(static_cast<double>(B)) > 62.0)
    throw ConfigError("ModelParams: B^d exceeds 2^62");
  ModelParams p;
  p.d = d;
  p.B = B;
  p.offspring = std::move(offspring);
  p.grid_mode = true;
  p.rho = 1.0 / static_cast<double>(B);
  const double mu = p.offspring.mean();
  p.c = mu / p.bd();
  if (mu > 1.0) {
    p.beta = 2.0 * std::log(static_cast<double>(B)) / std::log(mu);
    // Cross-check the two derivations of c; a mismatch would mean the
    // beta/c algebra drifted.
    const double c2 = std::pow(static_cast<double>(B), 2.0 / p.beta -
                                                          static_cast<double>(d));
    if (std::fabs(p.c - c2) > 1e-12 * std::max(1.0, p.c))
      throw std::logic_error("ModelParams: c = mu B^-d vs B^(2/beta-d) mismatch");
  } else {
    p.beta = std::numeric_limits<double>::quiet_NaN();
  }
  return p;
}

ModelParams ModelParams::free_mode(double mu, int d) {
  if (!(mu > 1.0)) throw ConfigError("free mode requires mean > 1");
  if (d < 1) throw ConfigError("ModelParams: d must be >= 1");
  ModelParams p;
  p.d = d;
  p.B = 0;
  p.offspring = OffspringLaw::geometric_mean(mu);
  p.grid_mode = false;
  p.beta = 1.0;
  p.rho = 1.0 / std::sqrt(mu);
  p.c = 0.0;
  return p;
}

double ModelParams::bd() const {
  return std::pow(static_cast<double>(B), static_cast<double>(d));
}

uint64_t ModelParams::bd_u64() const {
  uint64_t n = 1;
  for (int i = 0; i < d; ++i) n *= static_cast<uint64_t>(B);
  return n;
}

Regime ModelParams::regime() const {
  const double mu = offspring.mean();
  const double target = bd();
  if (std::fabs(mu - target) <= 1e-9 * target) return Regime::kCritical;
  return (mu < target) ? Regime::kSubcritical : Regime::kSupercriticalSpatial;
}

std::string ModelParams::regime_name() const {
  switch (regime()) {
    case Regime::kCritical:
      return "critical";
    case Regime::kSubcritical:
      return "subcritical";
    case Regime::kSupercriticalSpatial:
      return "supercritical_spatial";
  }
  return "?";
}

ModelParams ModelParams::from_json_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("params JSON parse error: ") + e.what());
  }
  try {
    const std::string mode = j.value("mode", std::string("grid"));
    if (mode == "grid") {
      return grid(j.at("B").get<int>(), j.at("d").get<int>(),
                  OffspringLaw::from_json_text(j.at("offspring").dump()));
    }
    if (mode == "free") {
      return free_mode(j.at("mean").get<double>(), j.at("d").get<int>());
    }
    throw ConfigError("unknown params mode: " + mode);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("params JSON field error: ") + e.what());
  }
}

std::string ModelParams::to_json_text() const {
  nlohmann::json j;
  if (grid_mode) {
    j["mode"] = "grid";
    j["B"] = B;
    j["d"] = d;
    j["offspring"] = nlohmann::json::parse(offspring.to_json_text());
  } else {
    j["mode"] = "free";
    j["mean"] = offspring.mean();
    j["d"] = d;
  }
  return j.dump();
}

}  // namespace strm
