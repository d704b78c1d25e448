#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ehdo/montecarlo.hpp"
#include "ehdo/oracle.hpp"
#include "ehdo/solver.hpp"

#include <cmath>

using namespace ehdo;

namespace {

Vector make_vector(std::initializer_list<double> values) {
  Vector v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v[i++] = x;
  return v;
}

ScenarioInstance random_instance(Rng& rng, int T) {
  Vector H(T), D(T), g(T);
  for (int t = 0; t < T; ++t) {
    H[t] = 2.0 * rng.uniform01();
    D[t] = 2.0 * rng.uniform01();
    double gain = 2.0 * rng.uniform01();
    while (!(gain > 0.0)) gain = 2.0 * rng.uniform01();
    g[t] = gain;
  }
  return ScenarioInstance(T, 2.0 * rng.uniform01(), 2.0 * rng.uniform01(), H, D, g);
}

}  // namespace

TEST_CASE("degenerate axis: no energy means the zero lattice point") {
  LogRate rate;
  ScenarioInstance instance(1, 0.0, 0.8, make_vector({0.0}), make_vector({0.4}),
                            make_vector({1.0}));
  const DelaySearchResult result = grid_search_delay(instance, rate, GridSpec{101});
  CHECK(result.rates.rate[0] == 0.0);
  CHECK(result.objective == doctest::Approx(0.8 + 0.4).epsilon(1e-14));
  CHECK(result.error_bound == 0.0);
}

TEST_CASE("two-slot delay search reproduces the hand-checked optimum") {
  LogRate rate;
  ScenarioInstance instance(2, 2.0, 5.0, make_vector({0.0, 0.0}), make_vector({0.0, 0.0}),
                            make_vector({1.0, 1.0}));
  const DelaySearchResult result = grid_search_delay(instance, rate, GridSpec{2001});
  const double expected = 5.0 - (2.0 * std::log(8.0 / 3.0) + std::log(4.0 / 3.0)) / 2.0;
  CHECK(std::abs(result.objective - expected) <= result.error_bound);
  CHECK(result.error_bound > 0.0);
  CHECK(result.error_bound < 0.02);
}

TEST_CASE("horizon refusal") {
  LogRate rate;
  ScenarioInstance instance(5, 1.0, 1.0, Vector::Zero(5), Vector::Zero(5), Vector::Ones(5));
  CHECK_THROWS_AS(grid_search_delay(instance, rate, GridSpec{11}), std::invalid_argument);
  CHECK_THROWS_AS(grid_search_weighted_throughput(instance, GridSpec{11}),
                  std::invalid_argument);
  CHECK_THROWS_AS(grid_search_delay(instance, rate, GridSpec{1}), std::invalid_argument);
}

TEST_CASE("throughput search examples") {
  SUBCASE("weights favour the first slot") {
    ScenarioInstance instance(2, 2.0, 1.0, Vector::Zero(2), Vector::Zero(2), Vector::Ones(2));
    const ThroughputSearchResult result =
        grid_search_weighted_throughput(instance, GridSpec{801});
    CHECK(result.powers.power[0] == doctest::Approx(5.0 / 3.0).epsilon(0.01));
    CHECK(result.powers.power[1] == doctest::Approx(1.0 / 3.0).epsilon(0.05));
  }
  SUBCASE("no energy") {
    ScenarioInstance instance(2, 0.0, 1.0, Vector::Zero(2), Vector::Zero(2), Vector::Ones(2));
    const ThroughputSearchResult result =
        grid_search_weighted_throughput(instance, GridSpec{11});
    CHECK(result.powers.power.isZero(0.0));
    CHECK(result.objective == 0.0);
  }
  SUBCASE("late arrival cannot be used early") {
    ScenarioInstance instance(2, 0.0, 1.0, make_vector({0.0, 2.0}), Vector::Zero(2),
                              Vector::Ones(2));
    const ThroughputSearchResult result =
        grid_search_weighted_throughput(instance, GridSpec{801});
    CHECK(result.powers.power[0] == 0.0);
    CHECK(result.powers.power[1] == doctest::Approx(2.0).epsilon(1e-9));
  }
}

TEST_CASE("solver never loses to the lattice") {
  auto rate = make_log_rate();
  Rng rng(4242);
  for (int trial = 0; trial < 40; ++trial) {
    const int T = 2 + (trial % 2);
    const ScenarioInstance instance = random_instance(rng, T);
    const SolveOutcome outcome = solve_delay_minimization(instance, rate);
    const DelaySearchResult oracle = grid_search_delay(instance, *rate, GridSpec{301});
    // the lattice optimum can only sit above the true optimum
    CHECK(outcome.objective <= oracle.objective + 1e-6);
    CHECK(oracle.objective - outcome.objective <= oracle.error_bound + 1e-6);
  }
}

TEST_CASE("throughput lattice brackets the water-filling optimum") {
  Rng rng(888);
  for (int trial = 0; trial < 20; ++trial) {
    const int T = 2 + (trial % 2);
    const ScenarioInstance instance = random_instance(rng, T);
    const TransformedProblem problem =
        build_weighted_throughput_problem(instance, make_log_rate());
    const SolveOutcome outcome = solve_transformed(problem);
    // convert the solver's scaled objective to the weighted-throughput value
    const double solver_value = -T * outcome.objective;
    const ThroughputSearchResult oracle =
        grid_search_weighted_throughput(instance, GridSpec{301});
    CHECK(oracle.objective <= solver_value + 1e-6);
    CHECK(solver_value - oracle.objective <= oracle.error_bound + 1e-6);
  }
}

TEST_CASE("refining the lattice never worsens the best objective") {
  LogRate rate;
  Rng rng(1357);
  for (int trial = 0; trial < 20; ++trial) {
    const int T = 2 + (trial % 2);
    const ScenarioInstance instance = random_instance(rng, T);
    const DelaySearchResult coarse = grid_search_delay(instance, rate, GridSpec{41});
    // n -> 2n-1 nests the lattice
    const DelaySearchResult fine = grid_search_delay(instance, rate, GridSpec{81});
    CHECK(fine.objective <= coarse.objective + 1e-14);
  }
}

TEST_CASE("lattice points returned are feasible") {
  LogRate rate;
  Rng rng(2468);
  for (int trial = 0; trial < 30; ++trial) {
    const int T = 1 + (trial % 3);
    const ScenarioInstance instance = random_instance(rng, T);
    const DelaySearchResult result = grid_search_delay(instance, rate, GridSpec{101});
    long double power_sum = 0.0L, rate_sum = 0.0L;
    long double battery = instance.initial_energy, data = instance.initial_queue;
    for (int t = 0; t < T; ++t) {
      power_sum += rate.inverse(instance.channel_gains[t], result.rates.rate[t]);
      rate_sum += result.rates.rate[t];
      battery += instance.energy_arrivals[t];
      data += instance.data_arrivals[t];
      CHECK(static_cast<double>(power_sum) <= static_cast<double>(battery) * (1 + 1e-15));
      CHECK(static_cast<double>(rate_sum) <= static_cast<double>(data) * (1 + 1e-15));
    }
  }
}
