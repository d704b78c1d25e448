#include "ehdo/montecarlo.hpp"

#include "ehdo/waterfill.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

namespace ehdo {

Vector sample_uniform_trace(double mean, int horizon, Rng& rng) {
  if (!(mean >= 0.0)) throw std::invalid_argument("sample_uniform_trace: mean must be >= 0");
  Vector trace(horizon);
  for (int t = 0; t < horizon; ++t) trace[t] = 2.0 * mean * rng.uniform01();
  return trace;
}

Vector sample_nakagami2_gains(int horizon, Rng& rng) {
  Vector gains(horizon);
  for (int t = 0; t < horizon; ++t) {
    double gain = 0.5 * (rng.exponential() + rng.exponential());
    while (!(gain > 0.0)) gain = 0.5 * (rng.exponential() + rng.exponential());
    gains[t] = gain;
  }
  return gains;
}

int inversion_number(const Vector& values, double tie_tol) {
  if (!(tie_tol >= 0.0)) throw std::invalid_argument("inversion_number: tie_tol must be >= 0");
  const int n = static_cast<int>(values.size());
  int count = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (values[i] > values[j] + tie_tol) ++count;
    }
  }
  return count;
}

double capped_policy_delay(const ScenarioInstance& instance, const PowerPolicy& policy,
                           const RateFunction& rate) {
  const int T = instance.horizon;
  if (policy.power.size() != T) {
    throw std::invalid_argument("capped_policy_delay: policy length must equal the horizon");
  }
  double queue = instance.initial_queue;
  double queue_sum = 0.0;
  for (int t = 0; t < T; ++t) {
    const double scheduled = rate.value(instance.channel_gains[t], policy.power[t]);
    queue = std::max(0.0, queue + instance.data_arrivals[t] - scheduled);
    queue_sum += queue;
  }
  return queue_sum / static_cast<double>(T);
}

bool ExperimentResult::any_failed() const {
  for (const CellResult& cell : cells) {
    if (cell.failed) return true;
  }
  return false;
}

namespace {

constexpr double kInversionTieTol = 1e-9;
constexpr double kDominanceTol = 1e-6;

void validate_config(const ExperimentConfig& config) {
  if (config.horizon < 1) throw std::invalid_argument("ExperimentConfig: horizon must be >= 1");
  if (config.runs < 1) throw std::invalid_argument("ExperimentConfig: runs must be >= 1");
  if (config.mean_energy_grid.empty() || config.mean_data_grid.empty()) {
    throw std::invalid_argument("ExperimentConfig: arrival-mean grids must be nonempty");
  }
  for (double m : config.mean_energy_grid) {
    if (!(m >= 0.0)) throw std::invalid_argument("ExperimentConfig: E[H] means must be >= 0");
  }
  for (double m : config.mean_data_grid) {
    if (!(m >= 0.0)) throw std::invalid_argument("ExperimentConfig: E[D] means must be >= 0");
  }
  if (!(config.initial_energy >= 0.0) || !(config.initial_queue >= 0.0)) {
    throw std::invalid_argument("ExperimentConfig: initial state must be >= 0");
  }
}

struct RunTask {
  int cell_index;
  int run_index;
};

// Draw order within a run is fixed: energy trace, data trace, then gains.
ScenarioInstance draw_scenario(const ExperimentConfig& config, double mean_energy,
                               double mean_data, std::uint64_t run_seed) {
  Rng rng(run_seed);
  Vector energy = sample_uniform_trace(mean_energy, config.horizon, rng);
  Vector data = sample_uniform_trace(mean_data, config.horizon, rng);
  Vector gains = config.channel == ChannelModel::kNakagami2
                     ? sample_nakagami2_gains(config.horizon, rng)
                     : Vector::Ones(config.horizon);
  return ScenarioInstance(config.horizon, config.initial_energy, config.initial_queue,
                          std::move(energy), std::move(data), std::move(gains));
}

// Runs every (cell, run) task with a static round-robin partition over worker
// threads; each task writes only its own slots, and the aggregation below is a
// serial reduction in task order, so results are identical at every thread
// count.
template <typename PerRun>
void for_each_run(const ExperimentConfig& config, int cell_count, const PerRun& per_run) {
  const long total = static_cast<long>(cell_count) * config.runs;
  int threads = config.threads > 0 ? config.threads
                                   : static_cast<int>(std::thread::hardware_concurrency());
  threads = static_cast<int>(std::max<long>(1, std::min<long>(threads, total)));

  const auto work = [&](int worker) {
    for (long task = worker; task < total; task += threads) {
      const int cell = static_cast<int>(task / config.runs);
      const int run = static_cast<int>(task % config.runs);
      per_run(cell, run);
    }
  };
  if (threads == 1) {
    work(0);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int w = 0; w < threads; ++w) pool.emplace_back(work, w);
  for (std::thread& thread : pool) thread.join();
}

PolicyStats reduce_stats(const std::string& policy, const std::vector<double>& samples) {
  PolicyStats stats;
  stats.policy = policy;
  stats.runs = static_cast<int>(samples.size());
  double sum = 0.0;
  for (double v : samples) sum += v;
  stats.average = sum / stats.runs;
  if (stats.runs > 1) {
    double squared = 0.0;
    for (double v : samples) squared += (v - stats.average) * (v - stats.average);
    stats.standard_error = std::sqrt(squared / (stats.runs - 1)) / std::sqrt(double(stats.runs));
  }
  return stats;
}

struct CellLayout {
  std::vector<std::pair<double, double>> means;  // (E[H], E[D]) in cell-index order

  explicit CellLayout(const ExperimentConfig& config) {
    for (double mean_energy : config.mean_energy_grid) {
      for (double mean_data : config.mean_data_grid) {
        means.emplace_back(mean_energy, mean_data);
      }
    }
  }
};

}  // namespace

ExperimentResult run_inversion_experiment(const ExperimentConfig& config) {
  validate_config(config);
  if (config.channel != ChannelModel::kUnitGain) {
    throw std::invalid_argument(
        "run_inversion_experiment: requires the constant unit-gain channel");
  }

  const CellLayout layout(config);
  const int cell_count = static_cast<int>(layout.means.size());
  const int R = config.runs;
  auto rate = make_log_rate();

  std::vector<double> inversions(static_cast<size_t>(cell_count) * R, 0.0);
  std::vector<std::string> failures(static_cast<size_t>(cell_count) * R);

  for_each_run(config, cell_count, [&](int cell, int run) {
    const size_t slot = static_cast<size_t>(cell) * R + run;
    try {
      const std::uint64_t run_seed = config.seed ^ static_cast<std::uint64_t>(run) ^
                                     static_cast<std::uint64_t>(cell);
      const ScenarioInstance instance = draw_scenario(config, layout.means[cell].first,
                                                      layout.means[cell].second, run_seed);
      const SolveOutcome outcome = solve_delay_minimization(instance, rate, config.solver);
      inversions[slot] =
          static_cast<double>(inversion_number(outcome.powers.power, kInversionTieTol));
    } catch (const std::exception& error) {
      failures[slot] = error.what();
    }
  });

  ExperimentResult result;
  result.config = config;
  result.metric = "inversion_number";
  for (int cell = 0; cell < cell_count; ++cell) {
    CellResult cell_result;
    cell_result.cell_index = cell;
    cell_result.mean_energy = layout.means[cell].first;
    cell_result.mean_data = layout.means[cell].second;
    std::vector<double> samples;
    samples.reserve(R);
    for (int run = 0; run < R; ++run) {
      const size_t slot = static_cast<size_t>(cell) * R + run;
      if (!failures[slot].empty()) {
        cell_result.failed = true;
        cell_result.errors.push_back("run " + std::to_string(run) + ": " + failures[slot]);
        continue;
      }
      samples.push_back(inversions[slot]);
    }
    if (!samples.empty()) cell_result.stats.push_back(reduce_stats("dm", samples));
    result.cells.push_back(std::move(cell_result));
  }
  return result;
}

ExperimentResult run_delay_comparison(const ExperimentConfig& config) {
  validate_config(config);
  if (config.channel != ChannelModel::kNakagami2) {
    throw std::invalid_argument("run_delay_comparison: requires the Nakagami-2 channel");
  }

  const CellLayout layout(config);
  const int cell_count = static_cast<int>(layout.means.size());
  const int R = config.runs;
  auto rate = make_log_rate();

  std::vector<double> dm_delay(static_cast<size_t>(cell_count) * R, 0.0);
  std::vector<double> tm_delay(static_cast<size_t>(cell_count) * R, 0.0);
  std::vector<std::string> failures(static_cast<size_t>(cell_count) * R);

  for_each_run(config, cell_count, [&](int cell, int run) {
    const size_t slot = static_cast<size_t>(cell) * R + run;
    try {
      const std::uint64_t run_seed = config.seed ^ static_cast<std::uint64_t>(run) ^
                                     static_cast<std::uint64_t>(cell);
      const ScenarioInstance instance = draw_scenario(config, layout.means[cell].first,
                                                      layout.means[cell].second, run_seed);
      const SolveOutcome outcome = solve_delay_minimization(instance, rate, config.solver);
      dm_delay[slot] = outcome.objective;
      const WaterfillResult baseline = unweighted_dwf(instance);
      tm_delay[slot] = capped_policy_delay(instance, baseline.powers, *rate);
    } catch (const std::exception& error) {
      failures[slot] = error.what();
    }
  });

  ExperimentResult result;
  result.config = config;
  result.metric = "average_delay";
  for (int cell = 0; cell < cell_count; ++cell) {
    CellResult cell_result;
    cell_result.cell_index = cell;
    cell_result.mean_energy = layout.means[cell].first;
    cell_result.mean_data = layout.means[cell].second;
    std::vector<double> dm_samples, tm_samples;
    dm_samples.reserve(R);
    tm_samples.reserve(R);
    for (int run = 0; run < R; ++run) {
      const size_t slot = static_cast<size_t>(cell) * R + run;
      if (!failures[slot].empty()) {
        cell_result.failed = true;
        cell_result.errors.push_back("run " + std::to_string(run) + ": " + failures[slot]);
        continue;
      }
      dm_samples.push_back(dm_delay[slot]);
      tm_samples.push_back(tm_delay[slot]);
      if (dm_delay[slot] > tm_delay[slot] + kDominanceTol) ++cell_result.dominance_violations;
    }
    if (!dm_samples.empty()) {
      cell_result.stats.push_back(reduce_stats("dm", dm_samples));
      cell_result.stats.push_back(reduce_stats("tm", tm_samples));
    }
    result.cells.push_back(std::move(cell_result));
  }
  return result;
}

}  // namespace ehdo
