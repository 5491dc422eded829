// Scheduling-stage leader-follower game. The cavern (leader) posts a buying
// price per period; the plants (followers) answer with their jointly optimal
// schedules under fixed plans. A genetic algorithm searches the price space.

#ifndef H2CHAIN_STACKELBERG_HPP
#define H2CHAIN_STACKELBERG_HPP

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "h2chain/coalition.hpp"
#include "h2chain/milp.hpp"
#include "h2chain/plant.hpp"
#include "h2chain/prices.hpp"
#include "h2chain/scenario.hpp"

namespace h2chain {

enum class ArrivalConvention {
  kDayBoundary,    // priced at departure; shipments arriving after the horizon are still bought and resold
  kStrictHorizon,  // cavern-bound departures must arrive within the horizon
};

const char* to_string(ArrivalConvention convention);
// "departure" (alias "day-boundary") or "strict"; throws std::invalid_argument otherwise.
ArrivalConvention parse_arrival_convention(const std::string& text);

struct FollowerOptions {
  ArrivalConvention convention = ArrivalConvention::kDayBoundary;
  milp::MilpOptions milp;
};

struct FollowerResponse {
  std::vector<Schedule> schedules;  // parallel to plans
  std::vector<CostBreakdown> costs;
  double objective = 0.0;  // summed follower profit
  milp::SolveStatus status = milp::SolveStatus::kOptimal;
  double gap = 0.0;
  std::int64_t nodes = 0;
};

// A follower solve that ended without a proven optimum.
class FollowerSolveError : public std::runtime_error {
 public:
  FollowerSolveError(const std::string& what, milp::SolveStatus status, double gap, std::int64_t nodes)
      : std::runtime_error(what), status(status), gap(gap), nodes(nodes) {}
  milp::SolveStatus status;
  double gap;  // infinite when no schedule was found
  std::int64_t nodes;
};

// Joint follower MILP with plans (equipment, routes, fleets) fixed. Throws
// FollowerSolveError unless the solve is proven optimal.
FollowerResponse follower_best_response(const PriceSchedule& prices, const std::vector<PlanDecision>& plans,
                                        const Scenario& scenario, const FollowerOptions& options = {});

// Cavern profit p_o * sum(q) - sum(p_t * q_t) over cavern-bound shipments,
// each priced at its departure period.
double leader_profit(const std::vector<Schedule>& schedules, const std::vector<PlanDecision>& plans,
                     const PriceSchedule& prices, const Scenario& scenario);

// Leader profit at the followers' best response.
double leader_fitness(const PriceSchedule& prices, const Scenario& scenario, const std::vector<PlanDecision>& plans,
                      const FollowerOptions& options = {});

struct GAConfig {
  int population = 60;
  int generations = 150;
  double crossover_rate = 0.9;
  double mutation_rate = 0.2;
  double mutation_scale = 0.5;  // $/kg, standard deviation of a gene mutation
  int elitism = 2;
  std::uint64_t seed = 1;
  int threads = 1;
  // Flat prices seeded into generation 0 (clipped to each period's band);
  // empty means 17 evenly spaced prices across the band.
  std::vector<double> flat_seeds;
  // Further schedules seeded into generation 0 (clipped to the band).
  std::vector<PriceSchedule> extra_seeds;
  // Called with (generation, best fitness) after every generation.
  std::function<void(int, double)> on_generation;
};

// Throws std::invalid_argument on an unusable configuration.
void validate(const GAConfig& config);

// Evenly spaced flat prices over [max floor, min ceiling].
std::vector<double> default_flat_grid(const Scenario& scenario, int points = 17);

struct EquilibriumReport {
  PriceSchedule best_prices;
  double leader_profit = 0.0;
  std::vector<PlanDecision> plans;
  std::vector<Schedule> schedules;
  std::vector<CostBreakdown> costs;
  std::vector<double> follower_profits;               // per plant, parallel to plans
  std::vector<std::vector<double>> transaction_series;  // per plant, q^trans per departure period
  std::vector<std::vector<double>> discarded_series;    // per plant
  std::vector<double> injection_series;                 // cavern arrivals per period
  std::vector<double> fitness_history;                  // best of each generation, generation 0 first
  FollowerResponse response;  // the final follower solve
  ArrivalConvention convention = ArrivalConvention::kDayBoundary;
  std::int64_t evaluations = 0;  // distinct follower solves
};

// Assembles the report fields for one price schedule.
EquilibriumReport evaluate_prices(const PriceSchedule& prices, const Scenario& scenario,
                                  const std::vector<PlanDecision>& plans, const FollowerOptions& options = {});

EquilibriumReport optimize_prices(const Scenario& scenario, const std::vector<PlanDecision>& plans,
                                  const GAConfig& config = {}, const FollowerOptions& options = {});

struct SweepPoint {
  double price = 0.0;
  double leader_profit = 0.0;
  double total_volume = 0.0;  // cavern-bound q^trans, kg
};

std::vector<SweepPoint> fixed_price_sweep(const Scenario& scenario, const std::vector<PlanDecision>& plans,
                                          const std::vector<double>& grid, const FollowerOptions& options = {});
// Index of the most profitable point (first on ties); -1 when empty.
int best_sweep_point(const std::vector<SweepPoint>& sweep);

enum class SensitivityParameter { kOperatingCost, kInjectionCap };

// "K3" or "Qtrans"; throws std::invalid_argument otherwise.
SensitivityParameter parse_sensitivity_parameter(const std::string& text);
const char* to_string(SensitivityParameter parameter);

struct SensitivityOptions {
  PlanningOptions planning;
  GAConfig ga;
  FollowerOptions follower;
  bool run_scheduling = true;
};

struct SensitivityPoint {
  double value = 0.0;
  std::string structure;  // label of the structure whose plans are scheduled
  std::vector<std::string> stable_structures;
  std::vector<StructureValue> structures;  // every structure (operating-cost sweeps only)
  std::vector<double> block_values;        // of the scheduled structure at planning prices
  // Best structure total minus the no-cooperation total (operating-cost sweeps only).
  double cooperation_gain = 0.0;
  bool scheduled = false;
  EquilibriumReport equilibrium;
};

// Operating-cost sweeps re-plan every structure and schedule the stable one
// (best total among stable ones, or best overall when none is stable).
// Injection-cap sweeps keep `plans` (routes from `structure`) and re-run the
// leader search; each run is also seeded with the best prices of the runs
// before it.
std::vector<SensitivityPoint> sensitivity_sweep(const Scenario& scenario, SensitivityParameter parameter,
                                                const std::vector<double>& values,
                                                const std::vector<PlanDecision>& plans,
                                                const std::string& structure,
                                                const SensitivityOptions& options = {});

// Plans of the structure to schedule: stable with the best total, else best total.
const StructureValue& select_structure(const std::vector<StructureValue>& values,
                                       const std::vector<StabilityVerdict>& verdicts);

}  // namespace h2chain

#endif  // H2CHAIN_STACKELBERG_HPP
