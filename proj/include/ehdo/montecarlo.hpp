#pragma once

#include "ehdo/model.hpp"
#include "ehdo/solver.hpp"

#include <cstdint>
#include <random>
#include <string>

namespace ehdo {

/// Seeded pseudo-random source. The engine is the fully specified std
/// mt19937_64; the variate recipes below are hand-rolled because the standard
/// library's distributions are implementation-defined, and run provenance
/// promises reproducible streams.
class Rng {
 public:
  static constexpr const char* kAlgorithm = "mt19937_64";

  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Standard exponential via inversion; finite for every draw.
  double exponential() { return -std::log1p(-uniform01()); }

 private:
  std::mt19937_64 engine_;
};

/// i.i.d. Uniform[0, 2*mean] draws (the zero-anchored support with the given
/// mean); mean = 0 degenerates to the all-zero trace.
Vector sample_uniform_trace(double mean, int horizon, Rng& rng);

/// i.i.d. unit-mean Nakagami-2 power gains, i.e. Gamma(shape 2, scale 1/2),
/// sampled exactly as half the sum of two standard exponentials.
Vector sample_nakagami2_gains(int horizon, Rng& rng);

/// Number of pairs t1 < t2 with values[t1] > values[t2] + tie_tol; pairs within
/// tie_tol of each other do not count.
int inversion_number(const Vector& values, double tie_tol);

/// Average queue length produced by a (possibly queue-oblivious) power policy:
/// when the scheduled rate exceeds the queue content, the transmitted amount is
/// capped at the content (queue floored at zero) and the excess energy is lost.
double capped_policy_delay(const ScenarioInstance& instance, const PowerPolicy& policy,
                           const RateFunction& rate);

enum class ChannelModel { kUnitGain, kNakagami2 };

struct ExperimentConfig {
  int horizon = 10;
  double initial_energy = 1.0;
  double initial_queue = 1.0;
  std::vector<double> mean_energy_grid;  // E[H] values
  std::vector<double> mean_data_grid;    // E[D] values
  int runs = 100;                        // R per cell
  std::uint64_t seed = 1;
  ChannelModel channel = ChannelModel::kUnitGain;
  int threads = 0;  // 0 = hardware concurrency
  SolverOptions solver;
};

struct PolicyStats {
  std::string policy;      // "dm" or "tm"
  double average = 0.0;
  double standard_error = 0.0;  // sample std dev / sqrt(R)
  int runs = 0;
};

struct CellResult {
  int cell_index = 0;  // mean_energy index * |mean_data_grid| + mean_data index
  double mean_energy = 0.0;
  double mean_data = 0.0;
  std::vector<PolicyStats> stats;
  int dominance_violations = 0;  // delay experiment: runs with L_dm > L_tm + 1e-6
  bool failed = false;
  std::vector<std::string> errors;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::string rng_algorithm = Rng::kAlgorithm;
  std::string metric;  // "inversion_number" or "average_delay"
  std::vector<CellResult> cells;

  bool any_failed() const;
};

/// One delay-minimizing solve per run on unit-gain channels; the metric is the
/// inversion number of the optimal powers (tie tolerance 1e-9). Deterministic
/// for a given seed at any thread count: run r of cell c draws from seed
/// (config.seed ^ r ^ c).
ExperimentResult run_inversion_experiment(const ExperimentConfig& config);

/// Per-run comparison of the delay-minimizing policy against the
/// throughput-maximizing baseline under Nakagami-2 fading; the metric is the
/// average queue length of each policy.
ExperimentResult run_delay_comparison(const ExperimentConfig& config);

}  // namespace ehdo
