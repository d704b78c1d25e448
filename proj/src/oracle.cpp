#include "ehdo/oracle.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace ehdo {

namespace {

constexpr int kMaxOracleHorizon = 4;

void validate_grid(const GridSpec& grid) {
  if (grid.points_per_axis < 2) {
    throw std::invalid_argument("GridSpec: points_per_axis must be >= 2");
  }
}

// One lattice axis: the values k * h and, for the delay search, the matching
// inverse-rate (power) values. Tables keep the inner loops free of expm1 calls
// and make every feasibility comparison use identical arithmetic.
struct Axis {
  Vector values;
  Vector powers;  // delay search only
  double spacing = 0.0;

  int top() const { return static_cast<int>(values.size()) - 1; }
};

Axis make_axis(double upper, int points) {
  Axis axis;
  if (upper <= 0.0) {
    axis.values = Vector::Zero(1);
    return axis;
  }
  axis.spacing = upper / static_cast<double>(points - 1);
  axis.values.resize(points);
  for (int k = 0; k < points; ++k) axis.values[k] = static_cast<double>(k) * axis.spacing;
  return axis;
}

}  // namespace

DelaySearchResult grid_search_delay(const ScenarioInstance& instance, const RateFunction& rate,
                                    const GridSpec& grid) {
  validate_grid(grid);
  const int T = instance.horizon;
  if (T > kMaxOracleHorizon) {
    throw std::invalid_argument("grid_search_delay: horizon too large for exhaustive search");
  }

  const double total_energy = instance.initial_energy + instance.energy_arrivals.sum();
  const double total_data = instance.initial_queue + instance.data_arrivals.sum();

  // Cumulative right-hand sides, objective costs, and the arrival constant
  // Q0 + (1/T) sum (T+1-t) D_t.
  Vector battery_rhs(T), queue_rhs(T), cost(T);
  double offset = instance.initial_queue;
  {
    double e = instance.initial_energy, d = instance.initial_queue;
    for (int t = 0; t < T; ++t) {
      e += instance.energy_arrivals[t];
      d += instance.data_arrivals[t];
      battery_rhs[t] = e;
      queue_rhs[t] = d;
      cost[t] = -static_cast<double>(T - t) / static_cast<double>(T);
      offset -= cost[t] * instance.data_arrivals[t];
    }
  }

  std::vector<Axis> axes(T);
  double max_spacing = 0.0;
  for (int t = 0; t < T; ++t) {
    // No rate can exceed the whole data supply or what the whole energy supply
    // can pay for, so the box still contains the optimum.
    const double upper =
        std::min(total_data, rate.value(instance.channel_gains[t], total_energy));
    axes[t] = make_axis(upper, grid.points_per_axis);
    if (axes[t].spacing > 0.0) {
      axes[t].powers.resize(axes[t].values.size());
      for (int k = 0; k <= axes[t].top(); ++k) {
        axes[t].powers[k] = rate.inverse(instance.channel_gains[t], axes[t].values[k]);
      }
    } else {
      axes[t].powers = Vector::Zero(1);
    }
    max_spacing = std::max(max_spacing, axes[t].spacing);
  }

  double best_objective = std::numeric_limits<double>::infinity();
  Vector best(T), current(T);
  best.setZero();
  current.setZero();

  // Ascending depth-first enumeration of the first T-1 axes with exact
  // cumulative-constraint pruning; the last axis needs no scan because the
  // objective strictly improves in q_T, so only the largest feasible lattice
  // point matters. Ties keep the first (lexicographically smallest) vector.
  const auto descend_last = [&](double power_sum, double rate_sum, int from) {
    int k = from;
    while (k > 0 && !(power_sum + axes[T - 1].powers[k] <= battery_rhs[T - 1] &&
                      rate_sum + axes[T - 1].values[k] <= queue_rhs[T - 1])) {
      --k;
    }
    return k;
  };

  struct Frame {
    double power_sum, rate_sum, partial;
  };
  const auto evaluate_last = [&](const Frame& frame, int& last_ptr) {
    last_ptr = descend_last(frame.power_sum, frame.rate_sum, last_ptr);
    const double objective = frame.partial + cost[T - 1] * axes[T - 1].values[last_ptr];
    if (objective < best_objective) {
      best_objective = objective;
      current[T - 1] = axes[T - 1].values[last_ptr];
      best = current;
    }
  };

  const auto enumerate = [&](auto&& self, int depth, Frame frame) -> void {
    if (depth == T - 1) return;  // handled by the caller's last-axis pointer
    int last_ptr = axes[T - 1].top();
    for (int k = 0; k <= axes[depth].top(); ++k) {
      const Frame next{frame.power_sum + axes[depth].powers[k],
                       frame.rate_sum + axes[depth].values[k],
                       frame.partial + cost[depth] * axes[depth].values[k]};
      if (!(next.power_sum <= battery_rhs[depth] && next.rate_sum <= queue_rhs[depth])) {
        break;  // both sums grow with k, so the rest of this axis is infeasible
      }
      current[depth] = axes[depth].values[k];
      if (depth == T - 2) {
        evaluate_last(next, last_ptr);
      } else {
        self(self, depth + 1, next);
      }
    }
  };

  if (T == 1) {
    int last_ptr = axes[0].top();
    evaluate_last(Frame{0.0, 0.0, 0.0}, last_ptr);
  } else {
    enumerate(enumerate, 0, Frame{0.0, 0.0, 0.0});
  }

  DelaySearchResult result;
  result.rates.rate = best;
  result.objective = offset + best_objective;
  double lipschitz = 0.0;
  for (int t = 0; t < T; ++t) lipschitz = std::max(lipschitz, -cost[t]);
  result.error_bound = lipschitz * max_spacing * static_cast<double>(T);
  return result;
}

ThroughputSearchResult grid_search_weighted_throughput(const ScenarioInstance& instance,
                                                       const GridSpec& grid) {
  validate_grid(grid);
  const int T = instance.horizon;
  if (T > kMaxOracleHorizon) {
    throw std::invalid_argument(
        "grid_search_weighted_throughput: horizon too large for exhaustive search");
  }

  Vector battery_rhs(T), weight(T);
  {
    double e = instance.initial_energy;
    for (int t = 0; t < T; ++t) {
      e += instance.energy_arrivals[t];
      battery_rhs[t] = e;
      weight[t] = static_cast<double>(T - t);
    }
  }
  const double total_energy = battery_rhs[T - 1];

  std::vector<Axis> axes(T);
  for (int t = 0; t < T; ++t) axes[t] = make_axis(total_energy, grid.points_per_axis);

  const auto slot_value = [&](int t, double p) {
    return weight[t] * std::log1p(instance.channel_gains[t] * p);
  };

  double best_objective = -std::numeric_limits<double>::infinity();
  Vector best(T), current(T);
  best.setZero();
  current.setZero();

  const auto evaluate_last = [&](double power_sum, double partial, int& last_ptr) {
    while (last_ptr > 0 &&
           !(power_sum + axes[T - 1].values[last_ptr] <= battery_rhs[T - 1])) {
      --last_ptr;
    }
    const double objective = partial + slot_value(T - 1, axes[T - 1].values[last_ptr]);
    if (objective > best_objective) {
      best_objective = objective;
      current[T - 1] = axes[T - 1].values[last_ptr];
      best = current;
    }
  };

  const auto enumerate = [&](auto&& self, int depth, double power_sum, double partial) -> void {
    int last_ptr = axes[T - 1].top();
    for (int k = 0; k <= axes[depth].top(); ++k) {
      const double next_sum = power_sum + axes[depth].values[k];
      if (!(next_sum <= battery_rhs[depth])) break;
      current[depth] = axes[depth].values[k];
      const double next_partial = partial + slot_value(depth, axes[depth].values[k]);
      if (depth == T - 2) {
        evaluate_last(next_sum, next_partial, last_ptr);
      } else {
        self(self, depth + 1, next_sum, next_partial);
      }
    }
  };

  if (T == 1) {
    int last_ptr = axes[0].top();
    evaluate_last(0.0, 0.0, last_ptr);
  } else {
    enumerate(enumerate, 0, 0.0, 0.0);
  }

  ThroughputSearchResult result;
  result.powers.power = best;
  result.objective = best_objective;
  double gradient_bound = 0.0;
  for (int t = 0; t < T; ++t) {
    gradient_bound = std::max(gradient_bound, weight[t] * instance.channel_gains[t]);
  }
  const double spacing = axes[0].spacing;
  result.error_bound = gradient_bound * spacing * static_cast<double>(T);
  return result;
}

}  // namespace ehdo
