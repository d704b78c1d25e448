#include "ehdo/model.hpp"

#include <cmath>
#include <string>

namespace ehdo {

double RateFunction::inverse_derivative(double gain, double rate) const {
  return 1.0 / derivative(gain, inverse(gain, rate));
}

double RateFunction::inverse_second_derivative(double gain, double rate) const {
  const double p = inverse(gain, rate);
  const double d1 = derivative(gain, p);
  return -second_derivative(gain, p) / (d1 * d1 * d1);
}

double LogRate::value(double gain, double power) const { return std::log1p(gain * power); }

double LogRate::inverse(double gain, double rate) const {
  if (rate > kMaxRate) {
    throw std::range_error("LogRate::inverse: rate " + std::to_string(rate) +
                           " exceeds representable range");
  }
  return std::expm1(rate) / gain;
}

double LogRate::derivative(double gain, double power) const {
  return gain / (1.0 + gain * power);
}

double LogRate::second_derivative(double gain, double power) const {
  const double u = 1.0 + gain * power;
  return -gain * gain / (u * u);
}

double LogRate::inverse_derivative(double gain, double rate) const {
  return std::exp(rate) / gain;
}

double LogRate::inverse_second_derivative(double gain, double rate) const {
  return std::exp(rate) / gain;
}

std::shared_ptr<const RateFunction> make_log_rate() {
  static const auto instance = std::make_shared<const LogRate>();
  return instance;
}

namespace {

bool all_finite(const Vector& v) { return v.allFinite(); }

}  // namespace

ScenarioInstance::ScenarioInstance(int horizon_in, double initial_energy_in,
                                   double initial_queue_in, Vector energy_arrivals_in,
                                   Vector data_arrivals_in, Vector channel_gains_in)
    : horizon(horizon_in),
      initial_energy(initial_energy_in),
      initial_queue(initial_queue_in),
      energy_arrivals(std::move(energy_arrivals_in)),
      data_arrivals(std::move(data_arrivals_in)),
      channel_gains(std::move(channel_gains_in)) {
  if (horizon < 1) throw std::invalid_argument("ScenarioInstance: horizon must be >= 1");
  if (energy_arrivals.size() != horizon || data_arrivals.size() != horizon ||
      channel_gains.size() != horizon) {
    throw std::invalid_argument("ScenarioInstance: trace lengths must equal the horizon");
  }
  if (!std::isfinite(initial_energy) || initial_energy < 0.0) {
    throw std::invalid_argument("ScenarioInstance: initial energy must be finite and >= 0");
  }
  if (!std::isfinite(initial_queue) || initial_queue < 0.0) {
    throw std::invalid_argument("ScenarioInstance: initial queue must be finite and >= 0");
  }
  if (!all_finite(energy_arrivals) || energy_arrivals.minCoeff() < 0.0) {
    throw std::invalid_argument("ScenarioInstance: energy arrivals must be finite and >= 0");
  }
  if (!all_finite(data_arrivals) || data_arrivals.minCoeff() < 0.0) {
    throw std::invalid_argument("ScenarioInstance: data arrivals must be finite and >= 0");
  }
  if (!all_finite(channel_gains) || channel_gains.minCoeff() <= 0.0) {
    throw std::invalid_argument("ScenarioInstance: channel gains must be finite and > 0");
  }
}

Trajectory simulate_trajectory(const ScenarioInstance& instance, const PowerPolicy& policy,
                               const RateFunction& rate) {
  const int T = instance.horizon;
  if (policy.power.size() != T) {
    throw std::invalid_argument("simulate_trajectory: policy length must equal the horizon");
  }
  Trajectory trajectory;
  trajectory.battery.resize(T + 1);
  trajectory.queue.resize(T + 1);
  trajectory.battery[0] = instance.initial_energy;
  trajectory.queue[0] = instance.initial_queue;
  for (int t = 0; t < T; ++t) {
    trajectory.battery[t + 1] =
        trajectory.battery[t] + instance.energy_arrivals[t] - policy.power[t];
    trajectory.queue[t + 1] = trajectory.queue[t] + instance.data_arrivals[t] -
                              rate.value(instance.channel_gains[t], policy.power[t]);
  }
  return trajectory;
}

double average_queue_length(const Trajectory& trajectory) {
  const Eigen::Index T = trajectory.queue.size() - 1;
  if (T < 1) throw std::invalid_argument("average_queue_length: empty trajectory");
  return trajectory.queue.tail(T).sum() / static_cast<double>(T);
}

double weighted_objective(const ScenarioInstance& instance, const PowerPolicy& policy,
                          const RateFunction& rate) {
  const int T = instance.horizon;
  if (policy.power.size() != T) {
    throw std::invalid_argument("weighted_objective: policy length must equal the horizon");
  }
  double weighted_sum = 0.0;
  for (int t = 0; t < T; ++t) {
    const double weight = static_cast<double>(T - t);  // T+1-t with t one-based
    weighted_sum += weight * (instance.data_arrivals[t] -
                              rate.value(instance.channel_gains[t], policy.power[t]));
  }
  return instance.initial_queue + weighted_sum / static_cast<double>(T);
}

FeasibilityReport check_feasibility(const ScenarioInstance& instance, const PowerPolicy& policy,
                                    const RateFunction& rate, double tol) {
  const int T = instance.horizon;
  if (policy.power.size() != T) {
    throw std::invalid_argument("check_feasibility: policy length must equal the horizon");
  }
  if (!(tol >= 0.0)) throw std::invalid_argument("check_feasibility: tol must be >= 0");

  FeasibilityReport report;
  report.battery_ok.resize(T);
  report.queue_ok.resize(T);
  report.power_ok.resize(T);
  report.battery_margin.resize(T);
  report.queue_margin.resize(T);

  // Cumulative sums in extended precision, accumulated in slot order.
  long double used_energy = 0.0L;
  long double available_energy = instance.initial_energy;
  long double sent_data = 0.0L;
  long double available_data = instance.initial_queue;
  for (int t = 0; t < T; ++t) {
    used_energy += policy.power[t];
    available_energy += instance.energy_arrivals[t];
    sent_data += rate.value(instance.channel_gains[t], policy.power[t]);
    available_data += instance.data_arrivals[t];

    report.battery_margin[t] = static_cast<double>(available_energy - used_energy);
    report.queue_margin[t] = static_cast<double>(available_data - sent_data);
    report.battery_ok[t] = report.battery_margin[t] >= -tol;
    report.queue_ok[t] = report.queue_margin[t] >= -tol;
    report.power_ok[t] = policy.power[t] >= -tol;
    report.feasible =
        report.feasible && report.battery_ok[t] && report.queue_ok[t] && report.power_ok[t];
  }
  return report;
}

}  // namespace ehdo
