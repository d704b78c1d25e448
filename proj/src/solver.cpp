#include "ehdo/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <utility>

namespace ehdo {

double KktResiduals::max() const {
  return std::max(std::max(stationarity, primal), std::max(dual_feasibility, complementarity));
}

ConvergenceError::ConvergenceError(std::string message, SolveOutcome best_outcome)
    : std::runtime_error(std::move(message)), best_(std::move(best_outcome)) {}

namespace {

Vector cumulative(double initial, const Vector& increments) {
  Vector out(increments.size());
  long double acc = initial;
  for (Eigen::Index t = 0; t < increments.size(); ++t) {
    acc += increments[t];
    out[t] = static_cast<double>(acc);
  }
  return out;
}

Vector delay_cost(int T) {
  Vector cost(T);
  for (int t = 0; t < T; ++t) cost[t] = -static_cast<double>(T - t) / static_cast<double>(T);
  return cost;
}

void validate_problem(const TransformedProblem& problem) {
  const int T = problem.horizon();
  if (T < 1) throw std::invalid_argument("TransformedProblem: empty horizon");
  if (!problem.rate) throw std::invalid_argument("TransformedProblem: rate function is required");
  if (problem.battery_rhs.size() != T || problem.gains.size() != T ||
      (problem.has_queue_constraints() && problem.queue_rhs.size() != T)) {
    throw std::invalid_argument("TransformedProblem: inconsistent dimensions");
  }
}

void validate_options(const SolverOptions& opts) {
  if (!(opts.tolerance > 0.0)) throw std::invalid_argument("SolverOptions: tolerance must be > 0");
  if (opts.max_iterations < 1) {
    throw std::invalid_argument("SolverOptions: max_iterations must be >= 1");
  }
  if (!(opts.barrier_factor > 1.0)) {
    throw std::invalid_argument("SolverOptions: barrier_factor must be > 1");
  }
}

// Barrier subproblem over the slots left free by the presolve. Slot j of the
// reduced problem is slot fixed + j of the full one; every cumulative
// constraint with index < fixed involves only fixed zeros and is dropped.
class BarrierProblem {
 public:
  BarrierProblem(const TransformedProblem& problem, int fixed)
      : problem_(problem), fixed_(fixed), n_(problem.horizon() - fixed) {}

  int size() const { return n_; }

  struct Evaluation {
    Vector inverse_power;  // r^{-1}(q_j)
    Vector battery_slack;  // battery_rhs - cumulative inverse power
    Vector queue_slack;    // queue_rhs - cumulative rates (empty if absent)
  };

  // Slacks at q, or nullopt when q is not strictly interior (or beyond the
  // rate function's representable range).
  std::optional<Evaluation> evaluate(const Vector& q) const {
    Evaluation eval;
    eval.inverse_power.resize(n_);
    eval.battery_slack.resize(n_);
    if (problem_.has_queue_constraints()) eval.queue_slack.resize(n_);
    long double power_sum = 0.0L;
    long double rate_sum = 0.0L;
    for (int j = 0; j < n_; ++j) {
      if (!(q[j] > 0.0) || q[j] > LogRate::kMaxRate) return std::nullopt;
      eval.inverse_power[j] = problem_.rate->inverse(gain(j), q[j]);
      power_sum += eval.inverse_power[j];
      eval.battery_slack[j] =
          static_cast<double>(problem_.battery_rhs[fixed_ + j] - power_sum);
      if (!(eval.battery_slack[j] > 0.0)) return std::nullopt;
      if (problem_.has_queue_constraints()) {
        rate_sum += q[j];
        eval.queue_slack[j] = static_cast<double>(problem_.queue_rhs[fixed_ + j] - rate_sum);
        if (!(eval.queue_slack[j] > 0.0)) return std::nullopt;
      }
    }
    return eval;
  }

  double barrier_value(double tb, const Vector& q, const Evaluation& eval) const {
    double value = tb * cost_dot(q);
    value -= eval.battery_slack.array().log().sum();
    if (problem_.has_queue_constraints()) value -= eval.queue_slack.array().log().sum();
    value -= q.array().log().sum();
    return value;
  }

  void derivatives(double tb, const Vector& q, const Evaluation& eval, Vector& grad,
                   Eigen::MatrixXd& hess) const {
    // Suffix sums of 1/s and 1/s^2 turn the cumulative-constraint structure
    // into O(n) gradient and O(n^2) Hessian assembly.
    Vector inv_b(n_), inv_b2(n_), inv_l(n_), inv_l2(n_);
    double accB = 0.0, accB2 = 0.0, accL = 0.0, accL2 = 0.0;
    for (int j = n_ - 1; j >= 0; --j) {
      const double sb = eval.battery_slack[j];
      accB += 1.0 / sb;
      accB2 += 1.0 / (sb * sb);
      inv_b[j] = accB;
      inv_b2[j] = accB2;
      if (problem_.has_queue_constraints()) {
        const double sl = eval.queue_slack[j];
        accL += 1.0 / sl;
        accL2 += 1.0 / (sl * sl);
      }
      inv_l[j] = accL;
      inv_l2[j] = accL2;
    }

    Vector dinv(n_), ddinv(n_);
    for (int j = 0; j < n_; ++j) {
      dinv[j] = problem_.rate->inverse_derivative(gain(j), q[j]);
      ddinv[j] = problem_.rate->inverse_second_derivative(gain(j), q[j]);
    }

    grad.resize(n_);
    for (int j = 0; j < n_; ++j) {
      grad[j] = tb * cost(j) + dinv[j] * inv_b[j] + inv_l[j] - 1.0 / q[j];
    }

    hess.resize(n_, n_);
    for (int k = 0; k < n_; ++k) {
      for (int j = 0; j <= k; ++j) {
        const double value = dinv[j] * dinv[k] * inv_b2[k] + inv_l2[k];
        hess(j, k) = value;
        hess(k, j) = value;
      }
      hess(k, k) += ddinv[k] * inv_b[k] + 1.0 / (q[k] * q[k]);
    }
  }

  double cost(int j) const { return problem_.cost[fixed_ + j]; }
  double gain(int j) const { return problem_.gains[fixed_ + j]; }

  double cost_dot(const Vector& q) const {
    double acc = 0.0;
    for (int j = 0; j < n_; ++j) acc += cost(j) * q[j];
    return acc;
  }

  int constraint_count() const { return n_ * (problem_.has_queue_constraints() ? 3 : 2); }

 private:
  const TransformedProblem& problem_;
  int fixed_;
  int n_;
};

// Number of leading slots forced to zero by a zero cumulative right-hand side.
// Both right-hand sides are nondecreasing, so their zero sets are prefixes.
int presolve_fixed_prefix(const TransformedProblem& problem) {
  int fixed = 0;
  for (int t = 0; t < problem.horizon(); ++t) {
    const bool battery_zero = problem.battery_rhs[t] <= 0.0;
    const bool queue_zero = problem.has_queue_constraints() && problem.queue_rhs[t] <= 0.0;
    if (battery_zero || queue_zero) fixed = t + 1;
  }
  return fixed;
}

// Strictly interior starting point for the reduced problem: small enough that
// every cumulative constraint keeps at least half of its smallest margin.
double interior_start(const TransformedProblem& problem, int fixed) {
  const int T = problem.horizon();
  const double energy_margin = problem.battery_rhs.tail(T - fixed).minCoeff();
  const double per_slot_power = energy_margin / (2.0 * T);
  double eps = std::numeric_limits<double>::infinity();
  for (int t = fixed; t < T; ++t) {
    eps = std::min(eps, problem.rate->value(problem.gains[t], per_slot_power));
  }
  if (problem.has_queue_constraints()) {
    eps = std::min(eps, problem.queue_rhs.tail(T - fixed).minCoeff() / (2.0 * T));
  }
  return eps;
}

struct BarrierState {
  Vector q;
  BarrierProblem::Evaluation eval;
  double tb = 1.0;
  int newton_iterations = 0;
  int stages = 0;
};

// Lawson-Hanson nonnegative least squares, min-norm inner solves so that the
// rank-deficient passive sets produced by coinciding active constraints are
// harmless. Deterministic: ties pick the lowest index.
Vector nnls(const Eigen::MatrixXd& matrix, const Vector& target) {
  const int n = static_cast<int>(matrix.cols());
  Vector x = Vector::Zero(n);
  std::vector<bool> passive(n, false);
  Vector gradient = matrix.transpose() * target;
  const double tolerance = 1e-10 * (1.0 + gradient.cwiseAbs().maxCoeff());

  for (int outer = 0; outer < 6 * n; ++outer) {
    int entering = -1;
    double best = tolerance;
    for (int i = 0; i < n; ++i) {
      if (!passive[i] && gradient[i] > best) {
        best = gradient[i];
        entering = i;
      }
    }
    if (entering < 0) break;
    passive[entering] = true;

    for (int inner = 0; inner < 6 * n; ++inner) {
      std::vector<int> members;
      for (int i = 0; i < n; ++i) {
        if (passive[i]) members.push_back(i);
      }
      Eigen::MatrixXd sub(matrix.rows(), members.size());
      for (size_t c = 0; c < members.size(); ++c) sub.col(c) = matrix.col(members[c]);
      const Vector z = sub.completeOrthogonalDecomposition().solve(target);

      double step = 1.0;
      int leaving = -1;
      for (size_t c = 0; c < members.size(); ++c) {
        if (z[c] <= 0.0) {
          const double xc = x[members[c]];
          const double candidate = xc / (xc - z[c]);
          if (candidate < step) {
            step = candidate;
            leaving = members[c];
          }
        }
      }
      if (leaving < 0) {
        for (size_t c = 0; c < members.size(); ++c) x[members[c]] = z[c];
        break;
      }
      for (size_t c = 0; c < members.size(); ++c) {
        x[members[c]] += step * (z[c] - x[members[c]]);
      }
      x[leaving] = 0.0;
      passive[leaving] = false;
    }
    gradient = matrix.transpose() * (target - matrix * x);
  }
  return x;
}

// Duals for the reduced problem by regularized least squares on the
// stationarity equations, each multiplier penalized by its slack so that the
// fit trades stationarity against complementarity the way the KKT residual
// does. The true multipliers score ~(slack * lambda) = O(1/tb) on both terms,
// so the minimizer certifies both blocks; barrier-gradient duals cannot, since
// one ulp of q near an active constraint swings the gradient by (tb*lambda)^2.
// The system is rank-deficient whenever several multipliers are free at once
// (coinciding active constraints), so the unconstrained solve is the min-norm
// one; when it turns up meaningfully negative components, the sign-constrained
// fit is rerun as a true NNLS.
void refine_duals(const BarrierProblem& barrier, const TransformedProblem& problem, int fixed,
                  const BarrierState& state, Vector& battery, Vector& queue, Vector& bounds) {
  const int n = barrier.size();
  const bool has_queue = problem.has_queue_constraints();
  const int unknowns = n * (has_queue ? 3 : 2);  // [lambda_B | (lambda_L) | mu]
  const int queue_base = n;
  const int bound_base = has_queue ? 2 * n : n;

  Eigen::MatrixXd stacked = Eigen::MatrixXd::Zero(n + unknowns, unknowns);
  Vector rhs = Vector::Zero(n + unknowns);
  for (int j = 0; j < n; ++j) {
    const double dinv = problem.rate->inverse_derivative(barrier.gain(j), state.q[j]);
    for (int t = j; t < n; ++t) {
      stacked(j, t) = dinv;
      if (has_queue) stacked(j, queue_base + t) = 1.0;
    }
    stacked(j, bound_base + j) = -1.0;
    rhs[j] = -barrier.cost(j);
  }
  for (int t = 0; t < n; ++t) {
    stacked(n + t, t) = state.eval.battery_slack[t];
    if (has_queue) stacked(n + queue_base + t, queue_base + t) = state.eval.queue_slack[t];
    stacked(n + bound_base + t, bound_base + t) = state.q[t];
  }

  Vector solution = stacked.completeOrthogonalDecomposition().solve(rhs);
  if (solution.minCoeff() < -1e-12 * (1.0 + solution.cwiseAbs().maxCoeff())) {
    solution = nnls(stacked, rhs);
  }

  for (int t = 0; t < n; ++t) {
    battery[fixed + t] = std::max(0.0, solution[t]);
    if (has_queue) queue[fixed + t] = std::max(0.0, solution[queue_base + t]);
    bounds[fixed + t] = std::max(0.0, solution[bound_base + t]);
  }
}

// Lift the central-path iterate back to the full problem. Constraints dropped
// by the presolve get zero multipliers, except that the last
// zero-right-hand-side constraint (active at q = 0) absorbs whatever mass
// makes the fixed slots' bound multipliers nonnegative; those bound
// multipliers are then read off stationarity exactly.
SolveOutcome assemble_outcome(const TransformedProblem& problem, int fixed,
                              const BarrierState& state) {
  const int T = problem.horizon();
  const int n = T - fixed;
  const bool has_queue = problem.has_queue_constraints();

  SolveOutcome outcome;
  outcome.newton_iterations = state.newton_iterations;
  outcome.barrier_stages = state.stages;
  outcome.rates.rate = Vector::Zero(T);
  outcome.duals.battery = Vector::Zero(T);
  outcome.duals.queue = has_queue ? Vector::Zero(T) : Vector();
  outcome.duals.bounds = Vector::Zero(T);

  for (int j = 0; j < n; ++j) outcome.rates.rate[fixed + j] = state.q[j];
  if (n > 0) {
    const BarrierProblem barrier(problem, fixed);
    refine_duals(barrier, problem, fixed, state, outcome.duals.battery, outcome.duals.queue,
                 outcome.duals.bounds);
  }
  double free_battery_mass = 0.0;
  double free_queue_mass = 0.0;
  for (int j = 0; j < n; ++j) {
    free_battery_mass += outcome.duals.battery[fixed + j];
    if (has_queue) free_queue_mass += outcome.duals.queue[fixed + j];
  }

  if (fixed > 0) {
    const bool battery_anchor = problem.battery_rhs[fixed - 1] <= 0.0;
    double extra = 0.0;
    for (int t = 0; t < fixed; ++t) {
      const double dinv0 = problem.rate->inverse_derivative(problem.gains[t], 0.0);
      const double partial = problem.cost[t] + dinv0 * free_battery_mass + free_queue_mass;
      const double coefficient = battery_anchor ? dinv0 : 1.0;
      extra = std::max(extra, -partial / coefficient);
    }
    if (battery_anchor) {
      outcome.duals.battery[fixed - 1] = extra;
    } else {
      outcome.duals.queue[fixed - 1] = extra;
    }
    const double battery_mass = free_battery_mass + (battery_anchor ? extra : 0.0);
    const double queue_mass = free_queue_mass + (battery_anchor ? 0.0 : extra);
    for (int t = 0; t < fixed; ++t) {
      const double dinv0 = problem.rate->inverse_derivative(problem.gains[t], 0.0);
      outcome.duals.bounds[t] = problem.cost[t] + dinv0 * battery_mass + queue_mass;
    }
  }

  outcome.powers.power.resize(T);
  for (int t = 0; t < T; ++t) {
    outcome.powers.power[t] = problem.rate->inverse(problem.gains[t], outcome.rates.rate[t]);
  }
  outcome.objective = problem.offset + problem.cost.dot(outcome.rates.rate);
  outcome.kkt = kkt_residuals(problem, outcome.rates, outcome.duals);
  return outcome;
}

// Damped-Newton minimization of tb * c'q + barrier(q), staged over increasing
// tb. The exit test at the final barrier weight is the full KKT residual of
// the lifted iterate, so the stopping rule coincides with the contract.
SolveOutcome run_barrier(const TransformedProblem& problem, int fixed,
                         const SolverOptions& opts) {
  const BarrierProblem barrier(problem, fixed);

  BarrierState state;
  state.q = Vector::Constant(barrier.size(), interior_start(problem, fixed));
  auto eval = barrier.evaluate(state.q);
  if (!eval) throw std::logic_error("solve_transformed: interior start is not interior");
  state.eval = *eval;

  // Final barrier weight. The duality gap (m/tb) and complementarity products
  // (1/tb) only need tb ~ m/tolerance; the extra factor parks variables that
  // are zero at the optimum three decades below the tolerance, so downstream
  // consumers see them as ties rather than an ordered noise sequence.
  const double tb_final =
      1000.0 *
      std::max(10.0 / opts.tolerance, 4.0 * barrier.constraint_count() / opts.tolerance);

  Vector grad;
  Eigen::MatrixXd hess;
  std::optional<SolveOutcome> best;
  int extra_stages = 0;
  while (true) {
    const bool final_stage = state.tb >= tb_final;
    ++state.stages;
    for (int inner = 0; inner < 100; ++inner) {
      barrier.derivatives(state.tb, state.q, state.eval, grad, hess);
      Vector step = hess.ldlt().solve(-grad);
      double decrement2 = -grad.dot(step);
      if (!std::isfinite(decrement2) || decrement2 < 0.0) {
        // Roundoff broke positive definiteness; fall back to scaled descent.
        step = -grad / std::max(1.0, hess.cwiseAbs().maxCoeff());
        decrement2 = -grad.dot(step);
      }
      const bool centered = decrement2 / 2.0 <= 1e-12;

      if (final_stage) {
        SolveOutcome candidate = assemble_outcome(problem, fixed, state);
        if (!best || candidate.kkt.max() < best->kkt.max()) best = std::move(candidate);
        if (best->kkt.max() <= opts.tolerance) return *best;
      }
      if (centered) break;

      if (state.newton_iterations >= opts.max_iterations) {
        SolveOutcome at_budget = best ? *best : assemble_outcome(problem, fixed, state);
        throw ConvergenceError("solve_transformed: Newton iteration budget exhausted",
                               std::move(at_budget));
      }
      ++state.newton_iterations;

      const double slope = grad.dot(step);
      const double base_value = barrier.barrier_value(state.tb, state.q, state.eval);
      double alpha = 1.0;
      double accepted_value = base_value;
      while (true) {
        const Vector candidate = state.q + alpha * step;
        auto trial = barrier.evaluate(candidate);
        if (trial) {
          const double value = barrier.barrier_value(state.tb, candidate, *trial);
          if (value <= base_value + 1e-4 * alpha * slope) {
            state.q = candidate;
            state.eval = *trial;
            accepted_value = value;
            break;
          }
        }
        alpha *= 0.5;
        if (alpha < 1e-18) break;
      }
      if (alpha < 1e-18) break;  // no acceptable step at this barrier weight
      if (base_value - accepted_value <= 1e-13 * (1.0 + std::abs(base_value))) {
        break;  // progress below double-precision resolution: numerically centered
      }
    }

    if (final_stage) {
      // Residuals did not certify at the target weight; a couple of further
      // pushes can still trade slack for complementarity.
      if (++extra_stages > 3) {
        throw ConvergenceError("solve_transformed: KKT tolerance not reached",
                               best ? *best : assemble_outcome(problem, fixed, state));
      }
      state.tb *= opts.barrier_factor;
    } else {
      // Jump straight to the final weight rather than centering at a sliver
      // stage just below it.
      state.tb = state.tb * opts.barrier_factor * opts.barrier_factor > tb_final
                     ? tb_final
                     : state.tb * opts.barrier_factor;
    }
  }
}

}  // namespace

TransformedProblem build_transformed_problem(const ScenarioInstance& instance,
                                             std::shared_ptr<const RateFunction> rate) {
  const int T = instance.horizon;
  TransformedProblem problem;
  problem.cost = delay_cost(T);
  problem.battery_rhs = cumulative(instance.initial_energy, instance.energy_arrivals);
  problem.queue_rhs = cumulative(instance.initial_queue, instance.data_arrivals);
  problem.gains = instance.channel_gains;
  problem.rate = std::move(rate);
  double weighted_data = 0.0;
  for (int t = 0; t < T; ++t) {
    weighted_data += static_cast<double>(T - t) * instance.data_arrivals[t];
  }
  problem.offset = instance.initial_queue + weighted_data / static_cast<double>(T);
  return problem;
}

TransformedProblem build_weighted_throughput_problem(const ScenarioInstance& instance,
                                                     std::shared_ptr<const RateFunction> rate) {
  TransformedProblem problem;
  problem.cost = delay_cost(instance.horizon);
  problem.battery_rhs = cumulative(instance.initial_energy, instance.energy_arrivals);
  problem.gains = instance.channel_gains;
  problem.rate = std::move(rate);
  return problem;
}

SolveOutcome solve_transformed(const TransformedProblem& problem, const SolverOptions& opts) {
  validate_problem(problem);
  validate_options(opts);

  const int fixed = presolve_fixed_prefix(problem);
  if (fixed == problem.horizon()) {
    // Every slot is pinned at zero; the optimum is the origin.
    BarrierState trivial;
    trivial.q = Vector();
    return assemble_outcome(problem, fixed, trivial);
  }
  return run_barrier(problem, fixed, opts);
}

SolveOutcome solve_delay_minimization(const ScenarioInstance& instance,
                                      std::shared_ptr<const RateFunction> rate,
                                      const SolverOptions& opts) {
  const TransformedProblem problem = build_transformed_problem(instance, std::move(rate));
  return solve_transformed(problem, opts);
}

KktResiduals kkt_residuals(const TransformedProblem& problem, const RatePolicy& rates,
                           const DualVariables& duals) {
  validate_problem(problem);
  const int T = problem.horizon();
  const bool has_queue = problem.has_queue_constraints();
  if (rates.rate.size() != T || duals.battery.size() != T || duals.bounds.size() != T ||
      duals.queue.size() != (has_queue ? T : 0)) {
    throw std::invalid_argument("kkt_residuals: inconsistent dimensions");
  }

  KktResiduals residuals;

  // Primal feasibility and complementarity over the cumulative constraints.
  long double power_sum = 0.0L;
  long double rate_sum = 0.0L;
  for (int t = 0; t < T; ++t) {
    power_sum += problem.rate->inverse(problem.gains[t], rates.rate[t]);
    const double battery_violation =
        -static_cast<double>(problem.battery_rhs[t] - power_sum);
    residuals.primal = std::max(residuals.primal, battery_violation);
    residuals.complementarity =
        std::max(residuals.complementarity, std::abs(duals.battery[t] * battery_violation));
    if (has_queue) {
      rate_sum += rates.rate[t];
      const double queue_violation = -static_cast<double>(problem.queue_rhs[t] - rate_sum);
      residuals.primal = std::max(residuals.primal, queue_violation);
      residuals.complementarity =
          std::max(residuals.complementarity, std::abs(duals.queue[t] * queue_violation));
    }
    residuals.primal = std::max(residuals.primal, -rates.rate[t]);
    residuals.complementarity =
        std::max(residuals.complementarity, std::abs(duals.bounds[t] * rates.rate[t]));
  }

  // Stationarity: cost + J' lambda - mu, via suffix sums of the cumulative
  // constraints' multipliers.
  double battery_suffix = 0.0;
  double queue_suffix = 0.0;
  Vector stationarity(T);
  for (int t = T - 1; t >= 0; --t) {
    battery_suffix += duals.battery[t];
    if (has_queue) queue_suffix += duals.queue[t];
    const double dinv = problem.rate->inverse_derivative(problem.gains[t], rates.rate[t]);
    stationarity[t] = problem.cost[t] + dinv * battery_suffix + queue_suffix - duals.bounds[t];
  }
  residuals.stationarity = stationarity.cwiseAbs().maxCoeff();

  double most_negative = 0.0;
  most_negative = std::min(most_negative, duals.battery.minCoeff());
  if (has_queue) most_negative = std::min(most_negative, duals.queue.minCoeff());
  most_negative = std::min(most_negative, duals.bounds.minCoeff());
  residuals.dual_feasibility = std::max(0.0, -most_negative);

  return residuals;
}

}  // namespace ehdo
