#pragma once

#include "ehdo/model.hpp"
#include "ehdo/montecarlo.hpp"
#include "ehdo/solver.hpp"
#include "ehdo/waterfill.hpp"

#include <nlohmann/json_fwd.hpp>

#include <string>

namespace ehdo {

using Json = nlohmann::json;

/// Shortest decimal string that round-trips the value exactly; keeps emitted
/// files bit-stable across runs and thread counts.
std::string format_double(double value);

/// Scenario files carry {"T", "E0", "Q0", "H", "D", "g"} with arrays of
/// length T.
ScenarioInstance scenario_from_json(const Json& document);
Json scenario_to_json(const ScenarioInstance& instance);
ScenarioInstance load_scenario(const std::string& path);

ExperimentConfig experiment_config_from_json(const Json& document);
Json experiment_config_to_json(const ExperimentConfig& config);
ExperimentConfig load_experiment_config(const std::string& path);

Json solve_outcome_to_json(const SolveOutcome& outcome, const SolverOptions& opts);

/// Per-slot table for a solved scenario: t, H_t, D_t, g_t, p_t, r_t, E_t, Q_t.
std::string solution_csv(const ScenarioInstance& instance, const PowerPolicy& policy,
                         const RateFunction& rate);

/// Per-slot table of the water-filling geometry: t, w_t, delta_t, inflow,
/// p_t, d_t, nu_t.
std::string waterfill_csv(const WaterfillResult& result);

/// One row per cell per policy: E_H, E_D, policy, avg_metric, stderr, R, seed.
std::string experiment_result_csv(const ExperimentResult& result);
Json experiment_result_to_json(const ExperimentResult& result);

/// Write-temp-then-rename so readers never observe a partial file.
void write_file_atomic(const std::string& path, const std::string& contents);

std::string read_file(const std::string& path);

}  // namespace ehdo
