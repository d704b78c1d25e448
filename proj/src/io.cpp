#include "ehdo/io.hpp"

#include <nlohmann/json.hpp>

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace ehdo {

namespace {

Vector vector_from_json(const Json& array, const char* key) {
  if (!array.is_array()) {
    throw std::invalid_argument(std::string("scenario field '") + key + "' must be an array");
  }
  Vector out(array.size());
  Eigen::Index i = 0;
  for (const Json& entry : array) {
    if (!entry.is_number()) {
      throw std::invalid_argument(std::string("scenario field '") + key +
                                  "' must contain numbers");
    }
    out[i++] = entry.get<double>();
  }
  return out;
}

Json vector_to_json(const Vector& values) {
  Json array = Json::array();
  for (Eigen::Index i = 0; i < values.size(); ++i) array.push_back(values[i]);
  return array;
}

const Json& require(const Json& document, const char* key) {
  const auto it = document.find(key);
  if (it == document.end()) {
    throw std::invalid_argument(std::string("missing required field '") + key + "'");
  }
  return *it;
}

}  // namespace

std::string format_double(double value) {
  char buffer[32];
  const auto [end, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  if (ec != std::errc()) throw std::runtime_error("format_double: conversion failed");
  return std::string(buffer, end);
}

ScenarioInstance scenario_from_json(const Json& document) {
  if (!document.is_object()) throw std::invalid_argument("scenario document must be an object");
  const int horizon = require(document, "T").get<int>();
  return ScenarioInstance(horizon, require(document, "E0").get<double>(),
                          require(document, "Q0").get<double>(),
                          vector_from_json(require(document, "H"), "H"),
                          vector_from_json(require(document, "D"), "D"),
                          vector_from_json(require(document, "g"), "g"));
}

Json scenario_to_json(const ScenarioInstance& instance) {
  Json document;
  document["T"] = instance.horizon;
  document["E0"] = instance.initial_energy;
  document["Q0"] = instance.initial_queue;
  document["H"] = vector_to_json(instance.energy_arrivals);
  document["D"] = vector_to_json(instance.data_arrivals);
  document["g"] = vector_to_json(instance.channel_gains);
  return document;
}

ScenarioInstance load_scenario(const std::string& path) {
  return scenario_from_json(Json::parse(read_file(path)));
}

ExperimentConfig experiment_config_from_json(const Json& document) {
  if (!document.is_object()) throw std::invalid_argument("config document must be an object");
  ExperimentConfig config;
  config.horizon = require(document, "T").get<int>();
  config.initial_energy = require(document, "E0").get<double>();
  config.initial_queue = require(document, "Q0").get<double>();
  const Vector mean_energy = vector_from_json(require(document, "mean_H"), "mean_H");
  const Vector mean_data = vector_from_json(require(document, "mean_D"), "mean_D");
  config.mean_energy_grid.assign(mean_energy.begin(), mean_energy.end());
  config.mean_data_grid.assign(mean_data.begin(), mean_data.end());
  config.runs = require(document, "runs").get<int>();
  config.seed = require(document, "seed").get<std::uint64_t>();
  const std::string channel = require(document, "channel").get<std::string>();
  if (channel == "unit") {
    config.channel = ChannelModel::kUnitGain;
  } else if (channel == "nakagami2") {
    config.channel = ChannelModel::kNakagami2;
  } else {
    throw std::invalid_argument("config field 'channel' must be 'unit' or 'nakagami2'");
  }
  if (document.contains("threads")) config.threads = document["threads"].get<int>();
  if (document.contains("tol")) config.solver.tolerance = document["tol"].get<double>();
  if (document.contains("max_iters")) {
    config.solver.max_iterations = document["max_iters"].get<int>();
  }
  return config;
}

Json experiment_config_to_json(const ExperimentConfig& config) {
  Json document;
  document["T"] = config.horizon;
  document["E0"] = config.initial_energy;
  document["Q0"] = config.initial_queue;
  document["mean_H"] = config.mean_energy_grid;
  document["mean_D"] = config.mean_data_grid;
  document["runs"] = config.runs;
  document["seed"] = config.seed;
  document["channel"] = config.channel == ChannelModel::kUnitGain ? "unit" : "nakagami2";
  document["threads"] = config.threads;
  document["tol"] = config.solver.tolerance;
  document["max_iters"] = config.solver.max_iterations;
  return document;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  return experiment_config_from_json(Json::parse(read_file(path)));
}

Json solve_outcome_to_json(const SolveOutcome& outcome, const SolverOptions& opts) {
  Json document;
  document["p"] = vector_to_json(outcome.powers.power);
  document["q"] = vector_to_json(outcome.rates.rate);
  document["L_star"] = outcome.objective;
  document["kkt_residuals"] = {{"stationarity", outcome.kkt.stationarity},
                               {"primal", outcome.kkt.primal},
                               {"dual_feasibility", outcome.kkt.dual_feasibility},
                               {"complementarity", outcome.kkt.complementarity}};
  document["iterations"] = outcome.newton_iterations;
  document["barrier_stages"] = outcome.barrier_stages;
  document["duals"] = {{"battery", vector_to_json(outcome.duals.battery)},
                       {"queue", vector_to_json(outcome.duals.queue)},
                       {"bounds", vector_to_json(outcome.duals.bounds)}};
  document["options"] = {{"tol", opts.tolerance},
                         {"max_iters", opts.max_iterations},
                         {"barrier_factor", opts.barrier_factor}};
  return document;
}

std::string solution_csv(const ScenarioInstance& instance, const PowerPolicy& policy,
                         const RateFunction& rate) {
  const Trajectory trajectory = simulate_trajectory(instance, policy, rate);
  std::ostringstream out;
  out << "t,H_t,D_t,g_t,p_t,r_t,E_t,Q_t\n";
  for (int t = 0; t < instance.horizon; ++t) {
    out << (t + 1) << ',' << format_double(instance.energy_arrivals[t]) << ','
        << format_double(instance.data_arrivals[t]) << ','
        << format_double(instance.channel_gains[t]) << ',' << format_double(policy.power[t])
        << ',' << format_double(rate.value(instance.channel_gains[t], policy.power[t])) << ','
        << format_double(trajectory.battery[t + 1]) << ','
        << format_double(trajectory.queue[t + 1]) << '\n';
  }
  return out.str();
}

std::string waterfill_csv(const WaterfillResult& result) {
  std::ostringstream out;
  out << "t,w_t,delta_t,inflow_t,p_t,d_t,nu_t\n";
  const int T = static_cast<int>(result.tank.widths.size());
  for (int t = 0; t < T; ++t) {
    out << (t + 1) << ',' << format_double(result.tank.widths[t]) << ','
        << format_double(result.tank.grounds[t]) << ','
        << format_double(result.tank.inflows[t]) << ','
        << format_double(result.powers.power[t]) << ',' << format_double(result.depths[t])
        << ',' << format_double(result.levels.level[t]) << '\n';
  }
  return out.str();
}

std::string experiment_result_csv(const ExperimentResult& result) {
  std::ostringstream out;
  out << "E_H,E_D,policy,avg_metric,stderr,R,seed\n";
  for (const CellResult& cell : result.cells) {
    for (const PolicyStats& stats : cell.stats) {
      out << format_double(cell.mean_energy) << ',' << format_double(cell.mean_data) << ','
          << stats.policy << ',' << format_double(stats.average) << ','
          << format_double(stats.standard_error) << ',' << stats.runs << ','
          << result.config.seed << '\n';
    }
  }
  return out.str();
}

Json experiment_result_to_json(const ExperimentResult& result) {
  Json document;
  document["config"] = experiment_config_to_json(result.config);
  document["rng"] = result.rng_algorithm;
  document["metric"] = result.metric;
  Json cells = Json::array();
  for (const CellResult& cell : result.cells) {
    Json entry;
    entry["cell_index"] = cell.cell_index;
    entry["E_H"] = cell.mean_energy;
    entry["E_D"] = cell.mean_data;
    Json stats = Json::array();
    for (const PolicyStats& policy_stats : cell.stats) {
      stats.push_back({{"policy", policy_stats.policy},
                       {"average", policy_stats.average},
                       {"stderr", policy_stats.standard_error},
                       {"runs", policy_stats.runs}});
    }
    entry["stats"] = stats;
    entry["dominance_violations"] = cell.dominance_violations;
    entry["failed"] = cell.failed;
    if (!cell.errors.empty()) entry["errors"] = cell.errors;
    cells.push_back(std::move(entry));
  }
  document["cells"] = cells;
  return document;
}

void write_file_atomic(const std::string& path, const std::string& contents) {
  const std::filesystem::path target(path);
  if (target.has_parent_path()) std::filesystem::create_directories(target.parent_path());
  const std::filesystem::path temp = target.string() + ".tmp";
  {
    std::ofstream out(temp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("write_file_atomic: cannot open " + temp.string());
    out << contents;
    if (!out.flush()) throw std::runtime_error("write_file_atomic: write failed for " + path);
  }
  std::filesystem::rename(temp, target);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream contents;
  contents << in.rdbuf();
  return contents.str();
}

}  // namespace ehdo
