#pragma once

#include <nlohmann/json.hpp>

#include "config.hpp"

// Internal: one declaration pair per experiment suite (defaults document and
// runner).  Grouped by the core module each suite exercises.
namespace strmlab::suite {

// Occupancy chain and exact generating-function curves.
nlohmann::json survival_defaults();
nlohmann::json survival_run(const ExperimentConfig&);
nlohmann::json hitting_defaults();
nlohmann::json hitting_run(const ExperimentConfig&);
nlohmann::json mean_measure_defaults();
nlohmann::json mean_measure_run(const ExperimentConfig&);
nlohmann::json gw_exact_tables_defaults();
nlohmann::json gw_exact_tables_run(const ExperimentConfig&);
nlohmann::json growth_exponent_defaults();
nlohmann::json growth_exponent_run(const ExperimentConfig&);
nlohmann::json h_statistic_defaults();
nlohmann::json h_statistic_run(const ExperimentConfig&);

// Couplings, crossing, total disconnectedness, ball hitting.
nlohmann::json coupling_containment_defaults();
nlohmann::json coupling_containment_run(const ExperimentConfig&);
nlohmann::json monotone_coupling_defaults();
nlohmann::json monotone_coupling_run(const ExperimentConfig&);
nlohmann::json crossing_sweep_defaults();
nlohmann::json crossing_sweep_run(const ExperimentConfig&);
nlohmann::json td_certify_defaults();
nlohmann::json td_certify_run(const ExperimentConfig&);
nlohmann::json ball_hitting_defaults();
nlohmann::json ball_hitting_run(const ExperimentConfig&);
nlohmann::json beta_bracket_defaults();
nlohmann::json beta_bracket_run(const ExperimentConfig&);

// Genealogy: pair process and spine chain.
nlohmann::json gamma_supermartingale_defaults();
nlohmann::json gamma_supermartingale_run(const ExperimentConfig&);
nlohmann::json spine_defaults();
nlohmann::json spine_run(const ExperimentConfig&);

// Continuum bridge.
nlohmann::json sbm_validate_defaults();
nlohmann::json sbm_validate_run(const ExperimentConfig&);

}  // namespace strmlab::suite
