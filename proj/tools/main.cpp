#include "ehdo/io.hpp"
#include "ehdo/montecarlo.hpp"
#include "ehdo/oracle.hpp"
#include "ehdo/solver.hpp"
#include "ehdo/waterfill.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>

namespace {

// Exit codes: 0 success, 1 experiment/oracle check failed, 2 input or parse
// error, 3 solver failed to converge.
constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitInputError = 2;
constexpr int kExitNoConvergence = 3;

int log_level() {
  static const int level = [] {
    const char* env = std::getenv("EHDO_LOG");
    return env ? std::atoi(env) : 1;
  }();
  return level;
}

std::string sibling_with_extension(const std::string& path, const char* extension) {
  std::filesystem::path p(path);
  p.replace_extension(extension);
  return p.string();
}

struct SolverFlags {
  double tol = ehdo::SolverOptions{}.tolerance;
  int max_iters = ehdo::SolverOptions{}.max_iterations;
  double barrier_factor = ehdo::SolverOptions{}.barrier_factor;

  ehdo::SolverOptions options() const { return {tol, max_iters, barrier_factor}; }

  void attach(CLI::App* app) {
    app->add_option("--tol", tol, "KKT max-norm tolerance");
    app->add_option("--max-iters", max_iters, "Newton iteration budget");
    app->add_option("--barrier-factor", barrier_factor, "barrier weight growth factor");
  }
};

int cmd_solve(const std::string& input, const std::string& output, const SolverFlags& flags) {
  const ehdo::ScenarioInstance instance = ehdo::load_scenario(input);
  const auto rate = ehdo::make_log_rate();
  ehdo::SolveOutcome outcome;
  try {
    outcome = ehdo::solve_delay_minimization(instance, rate, flags.options());
  } catch (const ehdo::ConvergenceError& error) {
    std::cerr << "ehdo solve: " << error.what() << "\n"
              << "  best objective " << error.best().objective << ", KKT max residual "
              << error.best().kkt.max() << " after " << error.best().newton_iterations
              << " Newton iterations\n";
    return kExitNoConvergence;
  }
  ehdo::write_file_atomic(output,
                          ehdo::solve_outcome_to_json(outcome, flags.options()).dump(2) + "\n");
  ehdo::write_file_atomic(sibling_with_extension(output, ".csv"),
                          ehdo::solution_csv(instance, outcome.powers, *rate));
  if (log_level() >= 1) {
    std::cout << "L_star " << ehdo::format_double(outcome.objective) << " (KKT max "
              << outcome.kkt.max() << ", " << outcome.newton_iterations << " iterations)\n";
  }
  return kExitOk;
}

int cmd_waterfill(const std::string& input, const std::string& output) {
  const ehdo::ScenarioInstance instance = ehdo::load_scenario(input);
  const ehdo::WaterfillResult result = ehdo::weighted_dwf(instance);
  ehdo::write_file_atomic(output, ehdo::waterfill_csv(result));
  if (log_level() >= 1) {
    std::cout << "allocated " << ehdo::format_double(result.powers.power.sum()) << " of "
              << ehdo::format_double(result.tank.total_volume()) << " energy units\n";
  }
  return kExitOk;
}

int cmd_tm_baseline(const std::string& input, const std::string& output) {
  const ehdo::ScenarioInstance instance = ehdo::load_scenario(input);
  const auto rate = ehdo::make_log_rate();
  const ehdo::WaterfillResult result = ehdo::unweighted_dwf(instance);
  const double delay = ehdo::capped_policy_delay(instance, result.powers, *rate);

  ehdo::Json document;
  document["p"] = ehdo::Json::array();
  for (Eigen::Index t = 0; t < result.powers.power.size(); ++t) {
    document["p"].push_back(result.powers.power[t]);
  }
  document["L_tm"] = delay;
  ehdo::write_file_atomic(output, document.dump(2) + "\n");
  ehdo::write_file_atomic(sibling_with_extension(output, ".csv"), ehdo::waterfill_csv(result));
  if (log_level() >= 1) std::cout << "L_tm " << ehdo::format_double(delay) << "\n";
  return kExitOk;
}

struct ExperimentFlags {
  std::optional<std::uint64_t> seed;
  std::optional<int> runs;
  std::optional<int> threads;
  SolverFlags solver;

  void attach(CLI::App* app) {
    app->add_option("--seed", seed, "override the config seed");
    app->add_option("--runs", runs, "override the per-cell run count");
    app->add_option("--threads", threads, "worker threads (0 = all cores)");
    solver.attach(app);
  }
};

int cmd_experiment(const std::string& input, const std::string& output, bool inversion,
                   const ExperimentFlags& flags) {
  ehdo::ExperimentConfig config = ehdo::load_experiment_config(input);
  if (flags.seed) config.seed = *flags.seed;
  if (flags.runs) config.runs = *flags.runs;
  if (flags.threads) config.threads = *flags.threads;
  config.solver = flags.solver.options();

  const ehdo::ExperimentResult result =
      inversion ? ehdo::run_inversion_experiment(config) : ehdo::run_delay_comparison(config);

  if (log_level() >= 1) {
    for (const ehdo::CellResult& cell : result.cells) {
      std::cout << "cell " << (cell.cell_index + 1) << "/" << result.cells.size()
                << " E_H=" << ehdo::format_double(cell.mean_energy)
                << " E_D=" << ehdo::format_double(cell.mean_data);
      for (const ehdo::PolicyStats& stats : cell.stats) {
        std::cout << " " << stats.policy << "=" << ehdo::format_double(stats.average)
                  << " (stderr " << ehdo::format_double(stats.standard_error) << ")";
      }
      if (cell.failed) std::cout << " FAILED (" << cell.errors.size() << " runs)";
      std::cout << "\n";
    }
  }

  ehdo::write_file_atomic(output, ehdo::experiment_result_csv(result));
  ehdo::write_file_atomic(sibling_with_extension(output, ".json"),
                          ehdo::experiment_result_to_json(result).dump(2) + "\n");
  return result.any_failed() ? kExitCheckFailed : kExitOk;
}

int cmd_oracle_check(int instances, std::uint64_t seed, int points, const SolverFlags& flags) {
  const auto rate = ehdo::make_log_rate();
  const ehdo::GridSpec grid{points};
  ehdo::Rng rng(seed);
  int failures = 0;
  for (int i = 0; i < instances; ++i) {
    const int T = 2 + (i % 2);
    const double initial_energy = 2.0 * rng.uniform01();
    const double initial_queue = 2.0 * rng.uniform01();
    ehdo::Vector H = ehdo::sample_uniform_trace(1.0, T, rng);
    ehdo::Vector D = ehdo::sample_uniform_trace(1.0, T, rng);
    ehdo::Vector g(T);
    for (int t = 0; t < T; ++t) {
      double gain = 2.0 * rng.uniform01();
      while (!(gain > 0.0)) gain = 2.0 * rng.uniform01();
      g[t] = gain;
    }
    const ehdo::ScenarioInstance instance(T, initial_energy, initial_queue, std::move(H),
                                          std::move(D), std::move(g));

    const ehdo::SolveOutcome outcome =
        ehdo::solve_delay_minimization(instance, rate, flags.options());
    const ehdo::DelaySearchResult oracle = ehdo::grid_search_delay(instance, *rate, grid);

    const double gap = oracle.objective - outcome.objective;
    const bool pass = gap >= -1e-6 && gap <= oracle.error_bound + 1e-6;
    if (!pass) ++failures;
    std::cout << (pass ? "PASS" : "FAIL") << " instance " << i << " T=" << T << " solver "
              << ehdo::format_double(outcome.objective) << " oracle "
              << ehdo::format_double(oracle.objective) << " bound "
              << ehdo::format_double(oracle.error_bound) << "\n";
  }
  if (failures > 0) {
    std::cerr << "oracle check: " << failures << "/" << instances << " instances failed\n";
    return kExitCheckFailed;
  }
  std::cout << "oracle check: all " << instances << " instances passed\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"offline delay-optimal scheduling for energy-harvesting transmitters"};
  app.require_subcommand(1);

  std::string input, output;
  SolverFlags solver_flags;
  ExperimentFlags experiment_flags;
  int oracle_instances = 100;
  std::uint64_t oracle_seed = 7;
  int oracle_points = 2001;

  CLI::App* solve = app.add_subcommand("solve", "minimize the average queue length");
  solve->add_option("--input", input, "scenario JSON")->required();
  solve->add_option("--output", output, "solution JSON path (per-slot CSV written alongside)")
      ->required();
  solver_flags.attach(solve);

  CLI::App* waterfill =
      app.add_subcommand("waterfill", "weighted directional water-filling table");
  waterfill->add_option("--input", input, "scenario JSON")->required();
  waterfill->add_option("--output", output, "per-slot CSV path")->required();

  CLI::App* baseline =
      app.add_subcommand("tm-baseline", "throughput-maximizing baseline policy");
  baseline->add_option("--input", input, "scenario JSON")->required();
  baseline->add_option("--output", output, "baseline JSON path (CSV written alongside)")
      ->required();

  CLI::App* inversion = app.add_subcommand("experiment-inversion",
                                           "average inversion numbers over a mean grid");
  inversion->add_option("--input", input, "experiment config JSON")->required();
  inversion->add_option("--output", output, "result CSV path (JSON written alongside)")
      ->required();
  experiment_flags.attach(inversion);

  CLI::App* delay = app.add_subcommand("experiment-delay",
                                       "delay comparison against the baseline policy");
  delay->add_option("--input", input, "experiment config JSON")->required();
  delay->add_option("--output", output, "result CSV path (JSON written alongside)")->required();
  experiment_flags.attach(delay);

  CLI::App* oracle = app.add_subcommand("oracle-check",
                                        "cross-validate the solver against grid search");
  oracle->add_option("--runs", oracle_instances, "number of random instances");
  oracle->add_option("--seed", oracle_seed, "RNG seed");
  oracle->add_option("--points", oracle_points, "lattice points per axis");
  solver_flags.attach(oracle);

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve->parsed()) return cmd_solve(input, output, solver_flags);
    if (waterfill->parsed()) return cmd_waterfill(input, output);
    if (baseline->parsed()) return cmd_tm_baseline(input, output);
    if (inversion->parsed()) return cmd_experiment(input, output, true, experiment_flags);
    if (delay->parsed()) return cmd_experiment(input, output, false, experiment_flags);
    if (oracle->parsed()) {
      return cmd_oracle_check(oracle_instances, oracle_seed, oracle_points, solver_flags);
    }
  } catch (const ehdo::ConvergenceError& error) {
    std::cerr << "ehdo: solver did not converge: " << error.what() << "\n";
    return kExitNoConvergence;
  } catch (const std::exception& error) {
    std::cerr << "ehdo: " << error.what() << "\n";
    return kExitInputError;
  }
  return kExitInputError;
}
