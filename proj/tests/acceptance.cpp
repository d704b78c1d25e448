// Acceptance suite: each criterion runs end-to-end at its stated tolerance and
// prints one [PASS]/[FAIL] line with the measured quantities. Run all with no
// arguments or a single one with --criterion N.

#include "ehdo/io.hpp"
#include "ehdo/montecarlo.hpp"
#include "ehdo/oracle.hpp"
#include "ehdo/solver.hpp"
#include "ehdo/waterfill.hpp"

#include <chrono>
#include <cmath>
#include <cstring>
#include <iostream>
#include <sstream>
#include <vector>

using namespace ehdo;

namespace {

constexpr std::uint64_t kBaseSeed = 20240601;

struct Criterion {
  int id = 0;
  std::string label;
  bool passed = false;
  std::string detail;
};

ExperimentConfig paper_grid_config(ChannelModel channel, int runs) {
  ExperimentConfig config;
  config.horizon = 10;
  config.initial_energy = 1.0;
  config.initial_queue = 1.0;
  config.mean_energy_grid = {0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0};
  config.mean_data_grid = {0.0, 1.0, 2.0};
  config.runs = runs;
  config.seed = kBaseSeed;
  config.channel = channel;
  return config;
}

ScenarioInstance random_problem3_instance(Rng& rng) {
  Vector H = sample_uniform_trace(1.0, 10, rng);
  Vector D = Vector::Zero(10);
  Vector g = sample_nakagami2_gains(10, rng);
  return ScenarioInstance(10, 2.0 * rng.uniform01(), 40.0, std::move(H), std::move(D),
                          std::move(g));
}

// --- criterion 1: zero-harvest inversion numbers -------------------------

Criterion criterion_zero_harvest() {
  Criterion result{1, "zero-harvest inversion number is 45 per run", false, ""};
  auto rate = make_log_rate();
  int mismatches = 0;
  long total = 0;
  double observed_sum = 0.0;
  for (int cell = 0; cell < 3; ++cell) {  // E[D] in {0, 1, 2}
    const double mean_data = static_cast<double>(cell);
    for (int run = 0; run < 100; ++run) {
      const std::uint64_t seed = kBaseSeed ^ static_cast<std::uint64_t>(run) ^
                                 static_cast<std::uint64_t>(cell);
      Rng rng(seed);
      Vector H = sample_uniform_trace(0.0, 10, rng);
      Vector D = sample_uniform_trace(mean_data, 10, rng);
      ScenarioInstance instance(10, 1.0, 1.0, std::move(H), std::move(D), Vector::Ones(10));
      const SolveOutcome outcome = solve_delay_minimization(instance, rate);
      const int inversions = inversion_number(outcome.powers.power, 1e-9);
      observed_sum += inversions;
      ++total;
      if (inversions != 45) ++mismatches;
    }
  }
  result.passed = mismatches == 0;
  std::ostringstream detail;
  detail << mismatches << "/" << total << " runs differ from 45; observed average "
         << observed_sum / static_cast<double>(total);
  result.detail = detail.str();
  return result;
}

// --- criterion 2: plateau values ------------------------------------------

Criterion criterion_plateau() {
  Criterion result{2, "inversion plateaus at E[H]=5 within +/-1.0 of 31.8/27.9/24.7", false,
                   ""};
  ExperimentConfig config = paper_grid_config(ChannelModel::kUnitGain, 10000);
  config.mean_energy_grid = {5.0};
  const ExperimentResult experiment = run_inversion_experiment(config);
  const double expected[3] = {31.8, 27.9, 24.7};
  bool ok = !experiment.any_failed();
  std::ostringstream detail;
  for (int cell = 0; cell < 3; ++cell) {
    const double average = experiment.cells[cell].stats.at(0).average;
    if (std::abs(average - expected[cell]) > 1.0) ok = false;
    detail << "E[D]=" << cell << ": " << average << " (target " << expected[cell] << ") ";
  }
  result.passed = ok;
  result.detail = detail.str();
  return result;
}

// --- criterion 3: monotone trend -------------------------------------------

Criterion criterion_monotone_trend() {
  Criterion result{3, "average inversion number non-increasing in E[H]", false, ""};
  const ExperimentConfig config = paper_grid_config(ChannelModel::kUnitGain, 2000);
  const ExperimentResult experiment = run_inversion_experiment(config);
  const int data_count = static_cast<int>(config.mean_data_grid.size());
  bool ok = !experiment.any_failed();
  std::ostringstream detail;
  int violations = 0;
  for (int d = 0; d < data_count; ++d) {
    for (size_t h = 0; h + 1 < config.mean_energy_grid.size(); ++h) {
      const CellResult& lo = experiment.cells[h * data_count + d];
      const CellResult& hi = experiment.cells[(h + 1) * data_count + d];
      const double band = 2.0 * std::sqrt(std::pow(lo.stats.at(0).standard_error, 2) +
                                          std::pow(hi.stats.at(0).standard_error, 2));
      if (hi.stats.at(0).average > lo.stats.at(0).average + band) {
        ok = false;
        ++violations;
        if (violations <= 4) {
          detail << "E[D]=" << lo.mean_data << " E[H] " << lo.mean_energy << "->"
                 << hi.mean_energy << ": " << lo.stats.at(0).average << "->"
                 << hi.stats.at(0).average << " (band " << band << ") ";
        }
      }
    }
  }
  if (violations == 0) detail << "all adjacent pairs non-increasing within 2 stderr";
  if (violations > 4) detail << "... " << violations << " violating pairs total";
  result.passed = ok;
  result.detail = detail.str();
  return result;
}

// --- criteria 4 and 5: water-filling vs solver, Theorem-2 levels -----------

Criterion criterion_waterfill_equivalence() {
  Criterion result{4, "weighted water-filling matches the convex solver to 1e-6", false, ""};
  auto rate = make_log_rate();
  Rng rng(kBaseSeed ^ 0x4444);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const ScenarioInstance instance = random_problem3_instance(rng);
    const WaterfillResult direct = weighted_dwf(instance);
    const TransformedProblem problem = build_weighted_throughput_problem(instance, rate);
    const SolveOutcome via_solver = solve_transformed(problem);
    worst = std::max(
        worst, (direct.powers.power - via_solver.powers.power).cwiseAbs().maxCoeff());
  }
  result.passed = worst <= 1e-6;
  std::ostringstream detail;
  detail << "max per-slot discrepancy " << worst << " over 100 instances";
  result.detail = detail.str();
  return result;
}

Criterion criterion_level_monotonicity() {
  Criterion result{5, "water levels nondecreasing (equality where battery slack)", false, ""};
  Rng rng(kBaseSeed ^ 0x4444);  // same instances as criterion 4
  int failures = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const ScenarioInstance instance = random_problem3_instance(rng);
    const WaterfillResult wf = weighted_dwf(instance);
    const LevelCheck check =
        verify_level_monotonicity(wf.levels, wf.powers, instance, 1e-8);
    if (!check.passed) ++failures;
  }
  result.passed = failures == 0;
  std::ostringstream detail;
  detail << failures << "/100 instances violate Theorem-2 level structure";
  result.detail = detail.str();
  return result;
}

// --- criterion 6: linear decreasing powers ---------------------------------

Criterion criterion_linear_power() {
  Criterion result{6, "front-loaded energy gives linear strictly decreasing powers", false,
                   ""};
  auto rate = make_log_rate();
  bool ok = true;
  std::ostringstream detail;
  for (double initial_energy : {0.5, 1.0, 2.0, 5.0}) {
    ScenarioInstance instance(10, initial_energy, 50.0, Vector::Zero(10), Vector::Zero(10),
                              Vector::Ones(10));
    const WaterfillResult wf = weighted_dwf(instance);
    int support = 0;
    while (support < 10 && wf.powers.power[support] > 0.0) ++support;
    for (int t = support; t < 10; ++t) {
      if (wf.powers.power[t] != 0.0) ok = false;  // support must be a prefix
    }
    for (int t = 0; t + 1 < support; ++t) {
      if (!(wf.powers.power[t] > wf.powers.power[t + 1])) ok = false;
    }
    double worst_second = 0.0;
    for (int t = 0; t + 2 < support; ++t) {
      worst_second = std::max(worst_second,
                              std::abs(wf.powers.power[t] - 2.0 * wf.powers.power[t + 1] +
                                       wf.powers.power[t + 2]));
    }
    if (worst_second > 1e-8) ok = false;

    const SolveOutcome full = solve_delay_minimization(instance, rate);
    const double gap = (full.powers.power - wf.powers.power).cwiseAbs().maxCoeff();
    if (gap > 1e-6) ok = false;
    detail << "E0=" << initial_energy << ": support " << support << ", |d2p| "
           << worst_second << ", solver gap " << gap << "; ";
  }
  result.passed = ok;
  result.detail = detail.str();
  return result;
}

// --- criterion 7: oracle equivalence ----------------------------------------

Criterion criterion_oracle() {
  Criterion result{7, "solver objective within the lattice oracle's error bound", false, ""};
  auto rate = make_log_rate();
  Rng rng(kBaseSeed ^ 0x7777);
  double worst_excess = -1e300;
  bool ok = true;
  for (int trial = 0; trial < 100; ++trial) {
    const int T = 2 + (trial % 2);
    Vector H(T), D(T), g(T);
    for (int t = 0; t < T; ++t) {
      H[t] = 2.0 * rng.uniform01();
      D[t] = 2.0 * rng.uniform01();
      double gain = 2.0 * rng.uniform01();
      while (!(gain > 0.0)) gain = 2.0 * rng.uniform01();
      g[t] = gain;
    }
    const ScenarioInstance instance(T, 2.0 * rng.uniform01(), 2.0 * rng.uniform01(), H, D, g);
    const SolveOutcome outcome = solve_delay_minimization(instance, rate);
    const DelaySearchResult oracle = grid_search_delay(instance, *rate, GridSpec{2001});
    const double gap = oracle.objective - outcome.objective;
    if (gap < -1e-6 || gap > oracle.error_bound + 1e-6) ok = false;
    worst_excess = std::max(worst_excess, gap - oracle.error_bound);
  }
  result.passed = ok;
  std::ostringstream detail;
  detail << "worst (gap - bound) " << worst_excess << " over 100 instances (must be <= 1e-6)";
  result.detail = detail.str();
  return result;
}

// --- criterion 8: KKT certification -----------------------------------------

Criterion criterion_kkt() {
  Criterion result{8, "KKT residuals <= 1e-8 and sensitive to perturbation", false, ""};
  auto rate = make_log_rate();
  Rng rng(kBaseSeed ^ 0x8888);
  double worst_residual = 0.0;
  double weakest_perturbed = 1e300;
  for (int trial = 0; trial < 60; ++trial) {
    const int T = 1 + static_cast<int>(rng.uniform01() * 12.0);
    Vector H = sample_uniform_trace(1.5, T, rng);
    Vector D = sample_uniform_trace(1.0, T, rng);
    Vector g = trial % 2 == 0 ? Vector::Ones(T).eval() : sample_nakagami2_gains(T, rng);
    const ScenarioInstance instance(T, 2.0 * rng.uniform01(), 2.0 * rng.uniform01(),
                                    std::move(H), std::move(D), std::move(g));
    const TransformedProblem problem = build_transformed_problem(instance, rate);
    const SolveOutcome outcome = solve_transformed(problem);
    worst_residual = std::max(
        worst_residual, std::max(std::max(outcome.kkt.stationarity, outcome.kkt.primal),
                                 std::max(outcome.kkt.dual_feasibility,
                                          outcome.kkt.complementarity)));
    RatePolicy perturbed{outcome.rates.rate.array() + 1e-3};
    const KktResiduals broken = kkt_residuals(problem, perturbed, outcome.duals);
    weakest_perturbed = std::min(weakest_perturbed, broken.max());
  }
  result.passed = worst_residual <= 1e-8 && weakest_perturbed > 1e-4;
  std::ostringstream detail;
  detail << "worst residual " << worst_residual << "; weakest perturbed residual "
         << weakest_perturbed;
  result.detail = detail.str();
  return result;
}

// --- criterion 9: delay dominance -------------------------------------------

Criterion criterion_dominance() {
  Criterion result{9, "delay-minimizing policy dominates the baseline on every run", false,
                   ""};
  // 33 cells x 304 runs = 10032 runs >= 10,000
  const ExperimentConfig config = paper_grid_config(ChannelModel::kNakagami2, 304);
  const ExperimentResult experiment = run_delay_comparison(config);
  bool ok = !experiment.any_failed();
  int total_violations = 0;
  int nonpositive_gaps = 0;
  for (const CellResult& cell : experiment.cells) {
    total_violations += cell.dominance_violations;
    const double gap = cell.stats.at(1).average - cell.stats.at(0).average;
    if (cell.mean_energy > 0.0 && !(gap > 0.0)) ++nonpositive_gaps;
  }
  if (total_violations > 0 || nonpositive_gaps > 0) ok = false;
  result.passed = ok;
  std::ostringstream detail;
  detail << total_violations << " dominance violations over "
         << config.runs * static_cast<int>(experiment.cells.size()) << " runs; "
         << nonpositive_gaps << " harvest cells without a positive average gap";
  result.detail = detail.str();
  return result;
}

// --- criterion 10: objective-form equivalence --------------------------------

Criterion criterion_objective_forms() {
  Criterion result{10, "policy-form objective equals the trajectory average", false, ""};
  LogRate rate;
  Rng rng(kBaseSeed ^ 0xaaaa);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int T = 1 + static_cast<int>(rng.uniform01() * 25.0);
    Vector H(T), D(T), g(T), p(T);
    for (int t = 0; t < T; ++t) {
      H[t] = 3.0 * rng.uniform01();
      g[t] = 0.05 + 3.0 * rng.uniform01();
      p[t] = H[t] * rng.uniform01();
      D[t] = rate.value(g[t], p[t]) + rng.uniform01();
    }
    const ScenarioInstance instance(T, 2.0 * rng.uniform01(), 3.0 * rng.uniform01(), H, D, g);
    const PowerPolicy policy{p};
    const double direct = average_queue_length(simulate_trajectory(instance, policy, rate));
    const double rewritten = weighted_objective(instance, policy, rate);
    worst = std::max(worst,
                     std::abs(direct - rewritten) / (1.0 + std::abs(rewritten)));
  }
  result.passed = worst <= 1e-12;
  std::ostringstream detail;
  detail << "worst relative discrepancy " << worst << " over 1000 feasible pairs";
  result.detail = detail.str();
  return result;
}

// --- criterion 11: determinism -----------------------------------------------

Criterion criterion_determinism() {
  Criterion result{11, "plateau experiment CSV is bitwise stable across thread counts",
                   false, ""};
  ExperimentConfig config = paper_grid_config(ChannelModel::kUnitGain, 10000);
  config.mean_energy_grid = {5.0};
  config.threads = 1;
  const std::string serial = experiment_result_csv(run_inversion_experiment(config));
  config.threads = 2;
  const std::string two = experiment_result_csv(run_inversion_experiment(config));
  config.threads = 4;
  const std::string four = experiment_result_csv(run_inversion_experiment(config));
  result.passed = serial == two && two == four;
  result.detail = result.passed ? "identical CSV bytes at 1, 2, and 4 threads"
                                : "CSV outputs differ across thread counts";
  return result;
}

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i + 1 < argc; ++i) {
    if (std::strcmp(argv[i], "--criterion") == 0) only = std::atoi(argv[i + 1]);
  }

  using CriterionFn = Criterion (*)();
  const CriterionFn criteria[] = {
      criterion_zero_harvest,   criterion_plateau,       criterion_monotone_trend,
      criterion_waterfill_equivalence, criterion_level_monotonicity, criterion_linear_power,
      criterion_oracle,         criterion_kkt,           criterion_dominance,
      criterion_objective_forms, criterion_determinism,
  };

  bool all_passed = true;
  for (size_t i = 0; i < sizeof(criteria) / sizeof(criteria[0]); ++i) {
    if (only != 0 && static_cast<int>(i) + 1 != only) continue;
    const auto start = std::chrono::steady_clock::now();
    const Criterion criterion = criteria[i]();
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cout << (criterion.passed ? "[PASS]" : "[FAIL]") << " criterion " << criterion.id
              << ": " << criterion.label << " - " << criterion.detail << " [" << seconds
              << "s]\n";
    if (!criterion.passed) all_passed = false;
  }
  return all_passed ? 0 : 1;
}
