#pragma once

#include <Eigen/Dense>

#include <memory>
#include <stdexcept>
#include <vector>

namespace ehdo {

using Vector = Eigen::VectorXd;

/// Per-slot achievable rate as a function of transmit power, parameterized by
/// the channel power gain. Implementations must be strictly increasing and
/// concave with a continuous second derivative on [0, inf), and value(g, 0) = 0.
class RateFunction {
 public:
  virtual ~RateFunction() = default;

  /// r_g(p).
  virtual double value(double gain, double power) const = 0;
  /// r_g^{-1}(q); throws std::range_error if q is outside the representable range.
  virtual double inverse(double gain, double rate) const = 0;
  /// dr_g/dp.
  virtual double derivative(double gain, double power) const = 0;
  /// d^2 r_g / dp^2.
  virtual double second_derivative(double gain, double power) const = 0;

  /// First derivative of the inverse map; default 1 / r'(r^{-1}(q)).
  virtual double inverse_derivative(double gain, double rate) const;
  /// Second derivative of the inverse map; default -r''(p) / r'(p)^3 at p = r^{-1}(q).
  virtual double inverse_second_derivative(double gain, double rate) const;
};

/// r_g(p) = log(1 + g p): Gaussian-channel capacity at power gain g, in nats.
class LogRate final : public RateFunction {
 public:
  /// Rates above this are rejected by inverse(): exp(q) would overflow a double.
  static constexpr double kMaxRate = 700.0;

  double value(double gain, double power) const override;
  double inverse(double gain, double rate) const override;
  double derivative(double gain, double power) const override;
  double second_derivative(double gain, double power) const override;
  double inverse_derivative(double gain, double rate) const override;
  double inverse_second_derivative(double gain, double rate) const override;
};

std::shared_ptr<const RateFunction> make_log_rate();

/// One offline scheduling problem: horizon, initial battery/queue state, and
/// the (known in advance) arrival and channel-gain traces.
///
/// Invariants are enforced at construction: horizon >= 1, arrivals nonnegative,
/// gains strictly positive, everything finite.
struct ScenarioInstance {
  int horizon = 0;              // number of slots T
  double initial_energy = 0.0;  // battery content before slot 1
  double initial_queue = 0.0;   // queued data before slot 1
  Vector energy_arrivals;       // harvested energy per slot, length T
  Vector data_arrivals;         // arriving data per slot, length T
  Vector channel_gains;         // channel power gain per slot, length T

  ScenarioInstance(int horizon, double initial_energy, double initial_queue,
                   Vector energy_arrivals, Vector data_arrivals, Vector channel_gains);
};

/// Transmit power per slot, length T.
struct PowerPolicy {
  Vector power;
};

/// Per-slot rate variables (the transformed optimization variables), length T.
struct RatePolicy {
  Vector rate;
};

/// Battery and queue levels induced by a policy; index 0 holds the initial
/// state, index t the state after slot t. Values may be negative; feasibility
/// is a separate check.
struct Trajectory {
  Vector battery;  // length T+1
  Vector queue;    // length T+1
};

/// Outcome of check_feasibility: per-slot cumulative-constraint flags and
/// margins (rhs - lhs; negative means violated beyond tolerance zero).
struct FeasibilityReport {
  bool feasible = true;
  std::vector<bool> battery_ok;  // sum_{i<=t} p_i <= E0 + sum_{i<=t} H_i + tol
  std::vector<bool> queue_ok;    // sum_{i<=t} r(p_i) <= Q0 + sum_{i<=t} D_i + tol
  std::vector<bool> power_ok;    // p_t >= -tol
  Vector battery_margin;
  Vector queue_margin;
};

/// Runs the battery and queue recursions
///   E_t = E_{t-1} + H_t - p_t,  Q_t = Q_{t-1} + D_t - r_{g_t}(p_t).
Trajectory simulate_trajectory(const ScenarioInstance& instance, const PowerPolicy& policy,
                               const RateFunction& rate);

/// Mean of Q_1..Q_T, the delay metric.
double average_queue_length(const Trajectory& trajectory);

/// The delay metric written directly in terms of the policy:
///   Q0 + (1/T) sum_t (T+1-t) [D_t - r_{g_t}(p_t)].
/// Agrees with average_queue_length(simulate_trajectory(...)) to roundoff.
double weighted_objective(const ScenarioInstance& instance, const PowerPolicy& policy,
                          const RateFunction& rate);

/// Checks the cumulative battery and data constraints and power nonnegativity
/// at absolute tolerance tol. Infeasibility is a report outcome, not an error.
FeasibilityReport check_feasibility(const ScenarioInstance& instance, const PowerPolicy& policy,
                                    const RateFunction& rate, double tol = 1e-9);

}  // namespace ehdo
