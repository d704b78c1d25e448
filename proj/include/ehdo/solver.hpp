#pragma once

#include "ehdo/model.hpp"
#include "ehdo/transform.hpp"

namespace ehdo {

struct SolverOptions {
  double tolerance = 1e-8;    // KKT max-norm target
  int max_iterations = 200;   // Newton step budget across all barrier stages
  double barrier_factor = 10.0;
};

/// Convex program over per-slot rate variables q >= 0:
///
///   minimize    offset + sum_t cost_t q_t
///   subject to  sum_{i<=t} r_{g_i}^{-1}(q_i) <= battery_rhs_t   for every t
///               sum_{i<=t} q_i               <= queue_rhs_t     (when present)
///
/// For the delay problem cost_t = -(T+1-t)/T and offset carries the arrival
/// constant, so the optimal value is the minimal average queue length. The
/// weighted-throughput variant drops the queue constraints and keeps the same
/// cost scale.
struct TransformedProblem {
  Vector cost;
  double offset = 0.0;
  Vector battery_rhs;  // E0 + cumulative energy arrivals
  Vector queue_rhs;    // Q0 + cumulative data arrivals; empty when omitted
  Vector gains;
  std::shared_ptr<const RateFunction> rate;

  int horizon() const { return static_cast<int>(cost.size()); }
  bool has_queue_constraints() const { return queue_rhs.size() > 0; }
};

/// Multipliers for the three constraint blocks, all length T (queue empty when
/// the problem has no queue constraints).
struct DualVariables {
  Vector battery;
  Vector queue;
  Vector bounds;
};

/// Max-norm residuals of the four KKT blocks.
struct KktResiduals {
  double stationarity = 0.0;
  double primal = 0.0;
  double dual_feasibility = 0.0;
  double complementarity = 0.0;

  double max() const;
};

struct SolveOutcome {
  RatePolicy rates;    // q*
  PowerPolicy powers;  // p* = r_{g_t}^{-1}(q_t*)
  double objective = 0.0;
  DualVariables duals;
  KktResiduals kkt;
  int newton_iterations = 0;
  int barrier_stages = 0;
};

/// Thrown when the iteration budget runs out before the KKT tolerance is met;
/// carries the best iterate and its residuals.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(std::string message, SolveOutcome best_outcome);

  const SolveOutcome& best() const { return best_; }

 private:
  SolveOutcome best_;
};

TransformedProblem build_transformed_problem(const ScenarioInstance& instance,
                                             std::shared_ptr<const RateFunction> rate);

/// Same battery constraints and cost scale, queue constraints dropped. Solving
/// it maximizes sum_t (T+1-t) r_{g_t}(p_t) over the energy-feasible set.
TransformedProblem build_weighted_throughput_problem(const ScenarioInstance& instance,
                                                     std::shared_ptr<const RateFunction> rate);

/// Deterministic log-barrier interior-point solve. Identical inputs and options
/// produce bit-identical outputs across runs and thread counts.
SolveOutcome solve_transformed(const TransformedProblem& problem, const SolverOptions& opts = {});

/// Full pipeline: build the convex program, solve it, and map the rates back to
/// powers through the canonical transform.
SolveOutcome solve_delay_minimization(const ScenarioInstance& instance,
                                      std::shared_ptr<const RateFunction> rate,
                                      const SolverOptions& opts = {});

/// KKT residuals of (q, duals) for the full problem, gradients evaluated
/// analytically (for LogRate the inverse-map derivative is e^q / g).
KktResiduals kkt_residuals(const TransformedProblem& problem, const RatePolicy& rates,
                           const DualVariables& duals);

}  // namespace ehdo
