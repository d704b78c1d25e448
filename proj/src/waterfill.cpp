#include "ehdo/waterfill.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace ehdo {

WaterTank WaterTank::weighted(const ScenarioInstance& instance) {
  const int T = instance.horizon;
  WaterTank tank;
  tank.widths.resize(T);
  tank.grounds.resize(T);
  tank.inflows = instance.energy_arrivals;
  tank.inflows[0] += instance.initial_energy;
  for (int t = 0; t < T; ++t) {
    tank.widths[t] = static_cast<double>(T - t);  // T+1-t with one-based t
    tank.grounds[t] = 1.0 / (tank.widths[t] * instance.channel_gains[t]);
  }
  return tank;
}

WaterTank WaterTank::unweighted(const ScenarioInstance& instance) {
  const int T = instance.horizon;
  WaterTank tank;
  tank.widths = Vector::Ones(T);
  tank.grounds = instance.channel_gains.cwiseInverse();
  tank.inflows = instance.energy_arrivals;
  tank.inflows[0] += instance.initial_energy;
  return tank;
}

double fill_level(const Vector& widths, const Vector& grounds, double volume) {
  const int n = static_cast<int>(widths.size());
  if (n < 1 || grounds.size() != n) {
    throw std::invalid_argument("fill_level: empty or mismatched segment");
  }
  if (!(volume >= 0.0)) throw std::invalid_argument("fill_level: negative volume");

  // Canonical processing order (ground, index): permuting the inputs cannot
  // change the arithmetic.
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return grounds[a] != grounds[b] ? grounds[a] < grounds[b] : a < b;
  });

  if (volume == 0.0) return grounds[order.front()];

  double width_sum = 0.0;
  double weighted_ground_sum = 0.0;
  for (int k = 0; k < n; ++k) {
    width_sum += widths[order[k]];
    weighted_ground_sum += widths[order[k]] * grounds[order[k]];
    const double level = (volume + weighted_ground_sum) / width_sum;
    if (k + 1 == n || level <= grounds[order[k + 1]]) return level;
  }
  return (volume + weighted_ground_sum) / width_sum;  // unreachable
}

WaterfillResult directional_waterfill(const WaterTank& tank) {
  const int T = static_cast<int>(tank.widths.size());

  struct Segment {
    int first = 0;
    int last = 0;
    double volume = 0.0;
    double level = 0.0;
  };
  std::vector<Segment> stack;
  stack.reserve(T);

  auto level_of = [&](int first, int last, double volume) {
    const int len = last - first + 1;
    return fill_level(tank.widths.segment(first, len), tank.grounds.segment(first, len), volume);
  };

  for (int t = 0; t < T; ++t) {
    Segment current{t, t, tank.inflows[t],
                    tank.inflows[t] > 0.0 ? tank.grounds[t] + tank.inflows[t] / tank.widths[t]
                                          : tank.grounds[t]};
    // Water flows right while the segment to the left sits higher; it never
    // flows back, so equal levels stay separate.
    while (!stack.empty() && stack.back().level > current.level) {
      const Segment& left = stack.back();
      current.first = left.first;
      current.volume += left.volume;
      stack.pop_back();
      current.level = level_of(current.first, current.last, current.volume);
    }
    stack.push_back(current);
  }

  WaterfillResult result;
  result.tank = tank;
  result.powers.power = Vector::Zero(T);
  result.depths = Vector::Zero(T);
  result.levels.level.resize(T);
  result.levels.dry.assign(T, false);
  for (const Segment& segment : stack) {
    for (int t = segment.first; t <= segment.last; ++t) {
      const double depth = segment.level - tank.grounds[t];
      if (depth > 0.0) {
        result.depths[t] = depth;
        result.powers.power[t] = tank.widths[t] * depth;
        result.levels.level[t] = segment.level;
      } else {
        result.levels.level[t] = tank.grounds[t];
        result.levels.dry[t] = true;
      }
    }
  }
  return result;
}

WaterfillResult weighted_dwf(const ScenarioInstance& instance) {
  return directional_waterfill(WaterTank::weighted(instance));
}

WaterfillResult unweighted_dwf(const ScenarioInstance& instance) {
  return directional_waterfill(WaterTank::unweighted(instance));
}

WaterLevels water_levels(const ScenarioInstance& instance, const PowerPolicy& policy) {
  const int T = instance.horizon;
  if (policy.power.size() != T) {
    throw std::invalid_argument("water_levels: policy length must equal the horizon");
  }
  if (policy.power.minCoeff() < 0.0) {
    throw std::invalid_argument("water_levels: powers must be >= 0");
  }
  const WaterTank tank = WaterTank::weighted(instance);
  WaterLevels levels;
  levels.level.resize(T);
  levels.dry.assign(T, false);
  for (int t = 0; t < T; ++t) {
    if (policy.power[t] > 0.0) {
      levels.level[t] = tank.grounds[t] + policy.power[t] / tank.widths[t];
    } else {
      levels.level[t] = tank.grounds[t];
      levels.dry[t] = true;
    }
  }
  return levels;
}

LevelCheck verify_level_monotonicity(const WaterLevels& levels, const PowerPolicy& policy,
                                     const ScenarioInstance& instance, double tol) {
  const int T = instance.horizon;
  if (static_cast<int>(levels.level.size()) != T || policy.power.size() != T) {
    throw std::invalid_argument("verify_level_monotonicity: inconsistent lengths");
  }

  LevelCheck check;
  long double used = 0.0L;
  long double available = instance.initial_energy;
  for (int t = 0; t + 1 < T; ++t) {
    used += policy.power[t];
    available += instance.energy_arrivals[t];
    if (!(policy.power[t] > 0.0) || !(policy.power[t + 1] > 0.0)) continue;

    const double gap = levels.level[t + 1] - levels.level[t];
    if (gap < -tol) {
      check.passed = false;
      check.violations.push_back({t + 1, "decrease", gap});
    }
    const double battery_slack = static_cast<double>(available - used);
    if (battery_slack > tol && std::abs(gap) > tol) {
      check.passed = false;
      check.violations.push_back({t + 1, "equality", gap});
    }
  }
  return check;
}

}  // namespace ehdo
