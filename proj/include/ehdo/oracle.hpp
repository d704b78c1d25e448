#pragma once

#include "ehdo/model.hpp"

namespace ehdo {

/// Lattice resolution for the brute-force searches. The per-variable domain is
/// derived from the instance: rates live in [0, min(Q0 + sum D, r_g(E0 + sum H))],
/// powers in [0, E0 + sum H].
struct GridSpec {
  int points_per_axis = 101;  // n >= 2
};

struct DelaySearchResult {
  RatePolicy rates;
  double objective = 0.0;
  double error_bound = 0.0;  // a-priori gap to the true optimum
};

struct ThroughputSearchResult {
  PowerPolicy powers;
  double objective = 0.0;
  double error_bound = 0.0;
};

/// Exhaustive lattice minimization of the average queue length over rate
/// space, constraints checked exactly at every lattice point. Exact over the
/// lattice; the reported bound is L * h * T with L the objective's Lipschitz
/// constant and h the largest lattice spacing. Refuses horizons above 4.
DelaySearchResult grid_search_delay(const ScenarioInstance& instance, const RateFunction& rate,
                                    const GridSpec& grid);

/// Lattice maximization of sum_t (T+1-t) log(1 + g_t p_t) under the cumulative
/// energy constraints; bound from the objective's gradient at p = 0.
ThroughputSearchResult grid_search_weighted_throughput(const ScenarioInstance& instance,
                                                       const GridSpec& grid);

}  // namespace ehdo
