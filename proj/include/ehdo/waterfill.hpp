#pragma once

#include "ehdo/model.hpp"

#include <string>

namespace ehdo {

/// Geometry of the directional water-filling picture. Slot t has width w_t
/// (the objective weight), ground level delta_t = 1 / (w_t g_t), and receives
/// inflow E0 + H_1 (t = 1) or H_t (t > 1). Walls between slots pass water to
/// the right only.
struct WaterTank {
  Vector widths;
  Vector grounds;
  Vector inflows;

  /// Weighted tank: w_t = T+1-t.
  static WaterTank weighted(const ScenarioInstance& instance);
  /// Classic tank: w_t = 1, ground 1/g_t.
  static WaterTank unweighted(const ScenarioInstance& instance);

  double total_volume() const { return inflows.sum(); }
};

/// Per-slot water levels. A dry slot (p_t = 0) has no water, so its level is
/// reported as the ground level and tagged.
struct WaterLevels {
  Vector level;
  std::vector<bool> dry;
};

struct WaterfillResult {
  PowerPolicy powers;
  WaterLevels levels;
  Vector depths;  // d_t = (nu_t - delta_t)^+ = p_t / w_t
  WaterTank tank;
};

/// Equalized water level for one merged segment: the nu solving
///   sum_{i : delta_i < nu} w_i (nu - delta_i) = volume,
/// found by scanning ground breakpoints; exact, no iteration. volume = 0
/// returns the lowest ground. The result is independent of the member order.
double fill_level(const Vector& widths, const Vector& grounds, double volume);

/// Unique maximizer of sum_t w_t log(1 + g_t p_t) under the cumulative energy
/// constraints, by left-to-right segment merging over right-permeable walls.
WaterfillResult directional_waterfill(const WaterTank& tank);

/// Weighted variant (w_t = T+1-t): the delay-optimal policy whenever the queue
/// stays positive throughout.
WaterfillResult weighted_dwf(const ScenarioInstance& instance);

/// Uniform-weight variant: the throughput-maximizing baseline policy.
WaterfillResult unweighted_dwf(const ScenarioInstance& instance);

/// Levels nu_t = delta_t + p_t / w_t for wet slots of the weighted tank; dry
/// slots report the ground with a tag (their dual-based level is not
/// recoverable from p alone).
WaterLevels water_levels(const ScenarioInstance& instance, const PowerPolicy& policy);

struct LevelViolation {
  int slot = 0;  // one-based slot t of the pair (t, t+1)
  std::string kind;  // "decrease" or "equality"
  double level_gap = 0.0;
};

struct LevelCheck {
  bool passed = true;
  std::vector<LevelViolation> violations;
};

/// Checks, over consecutive slots that both carry water, that levels never
/// decrease (beyond tol), and that they are equal (within tol) wherever the
/// cumulative battery constraint between them is slack by more than tol.
LevelCheck verify_level_monotonicity(const WaterLevels& levels, const PowerPolicy& policy,
                                     const ScenarioInstance& instance, double tol);

}  // namespace ehdo
