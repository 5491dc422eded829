// Plant physics and economics as linear-program pieces.
//
// A plan fixes each plant's equipment type, destination and (optionally) fleet
// size. Given a plan set and a price schedule, build_schedule_model emits one
// joint MILP covering processing, vehicle loading, the low-pressure tank,
// coalition transit, the round-trip fleet window and the cavern injection cap.

#ifndef H2CHAIN_PLANT_HPP
#define H2CHAIN_PLANT_HPP

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "h2chain/milp.hpp"
#include "h2chain/prices.hpp"
#include "h2chain/scenario.hpp"

namespace h2chain {

enum class TransportMode {
  kCompressed,  // CH2 in tube trailers, lossless
  kLiquefied,   // LH2 in tanker trucks, boil-off while loading and in transit
};

struct PlanDecision {
  int plant = 0;        // 0-based
  int equipment = 0;    // catalog type
  int destination = 0;  // partner plant, or Scenario::cavern_index()
  int fleet_size = 0;

  friend bool operator==(const PlanDecision&, const PlanDecision&) = default;
};

TransportMode mode_of(const PlanDecision& plan, const Scenario& scenario);
double vehicle_capacity(TransportMode mode, const Scenario& scenario);
double vehicle_invest_daily(TransportMode mode, const Scenario& scenario);
double energy_per_kg(TransportMode mode, const Scenario& scenario);
double processing_capacity(const PlanDecision& plan, const Scenario& scenario);  // kg per period
bool ships_to_cavern(const PlanDecision& plan, const Scenario& scenario);
// Travel periods of the plan's route.
int route_periods(const PlanDecision& plan, const Scenario& scenario);

// Fraction of loaded mass that reaches the destination: transit_retention
// compounded over the travel periods for LH2, exactly 1 for CH2.
double transit_retention(int from, int to, TransportMode mode, const TransportParams& transport);

struct FleetRange {
  int lower = 0;
  int upper = 0;
};

// [0, ceil(daily generation / vehicle capacity) + 2 * travel + 1].
FleetRange fleet_size_bounds(double unit_daily_generation, double vehicle_capacity, int travel_periods);

struct Schedule {
  int plant = 0;
  std::vector<double> processed;       // q^pr
  std::vector<double> shipped;         // q^trans, mass delivered per departure period
  std::vector<double> vehicle_buffer;  // q^store
  std::vector<double> tank_buffer;     // q^unpr
  std::vector<double> departures;      // n^cars, integral
  std::vector<double> discarded;
  std::vector<double> inbound;  // partner arrivals into the tank
  int fleet_size = 0;
};

struct CostBreakdown {
  double revenue = 0.0;
  double processing_cost = 0.0;
  double transport_cost = 0.0;
  double equipment_invest = 0.0;
  double fleet_invest = 0.0;
  double profit = 0.0;
};

enum class FleetMode {
  kFixed,     // use PlanDecision::fleet_size
  kOptimize,  // integer variable within fleet_size_bounds
};

struct ModelOptions {
  FleetMode fleet = FleetMode::kFixed;
  // Arrivals into a plant's tank from partners outside the model, indexed by
  // plant; each non-empty entry must have one value per period.
  std::vector<std::vector<double>> external_inbound;
  // Cavern injection already used by units outside the model, per period.
  std::vector<double> reserved_injection;
  bool enforce_injection_cap = true;
  // Cavern-bound departures that would arrive after the last period are
  // bought (and resold) anyway. Off: they are not allowed.
  bool late_arrivals_paid = true;
  // Integer running totals of departures carry the integrality; per-period
  // departures are their differences. Off: departures are the integers.
  bool cumulative_departures = true;
};

struct PlantVariables {
  int fleet = -1;  // -1 when the fleet is fixed
  std::vector<int> processed;
  std::vector<int> vehicle_buffer;
  std::vector<int> tank_buffer;
  std::vector<int> discarded;
  std::vector<int> departures;
  std::vector<int> dispatched;  // running totals, empty unless cumulative_departures
};

struct ScheduleModel {
  milp::LinearProgram lp;
  std::vector<PlanDecision> plans;
  std::vector<PlantVariables> vars;  // parallel to plans
};

class ModelBuildError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Throws ModelBuildError for invalid plans, partners missing from the plan set,
// or inbound series that do not cover exactly the horizon.
ScheduleModel build_schedule_model(std::span<const PlanDecision> plans, const Scenario& scenario,
                                   const PriceSchedule& prices, const ModelOptions& options = {});

// One Schedule per plan, read from a solver assignment.
std::vector<Schedule> extract_schedules(const ScheduleModel& model, std::span<const double> assignment,
                                        const Scenario& scenario, const ModelOptions& options = {});

CostBreakdown cost_breakdown(const Schedule& schedule, const PlanDecision& plan, const Scenario& scenario,
                             const PriceSchedule& prices);

// Cavern arrivals per period from the cavern-bound plans (departures shifted by
// the travel time; arrivals past the horizon are dropped).
std::vector<double> cavern_arrivals(std::span<const Schedule> schedules, std::span<const PlanDecision> plans,
                                    const Scenario& scenario);

// Per-period CSV: plant,period,price,tariff,processed,shipped,vehicle_buffer,
// tank_buffer,departures,discarded,inbound,revenue,processing_cost,transport_cost
std::string schedules_to_csv(std::span<const Schedule> schedules, std::span<const PlanDecision> plans,
                             const Scenario& scenario, const PriceSchedule& prices);

// One row per plant: plant,equipment,destination,fleet_size,revenue,
// processing_cost,transport_cost,equipment_invest,fleet_invest,profit
std::string costs_to_csv(std::span<const CostBreakdown> costs, std::span<const PlanDecision> plans);

}  // namespace h2chain

#endif  // H2CHAIN_PLANT_HPP
