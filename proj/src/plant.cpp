#include "h2chain/plant.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include <fmt/format.h>

namespace h2chain {

using milp::Relation;
using milp::VarType;

TransportMode mode_of(const PlanDecision& plan, const Scenario& s) {
  return s.catalog.is_compressor(plan.equipment) ? TransportMode::kCompressed : TransportMode::kLiquefied;
}

double vehicle_capacity(TransportMode mode, const Scenario& s) {
  return mode == TransportMode::kCompressed ? s.transport.tube_capacity : s.transport.tanker_capacity;
}

double vehicle_invest_daily(TransportMode mode, const Scenario& s) {
  return mode == TransportMode::kCompressed ? s.transport.tube_invest_daily : s.transport.tanker_invest_daily;
}

double energy_per_kg(TransportMode mode, const Scenario& s) {
  return mode == TransportMode::kCompressed ? s.catalog.compress_kwh_per_kg : s.catalog.liquefy_kwh_per_kg;
}

double processing_capacity(const PlanDecision& plan, const Scenario& s) {
  return s.catalog.capacity_per_hour[plan.equipment] * s.horizon.period_hours;
}

bool ships_to_cavern(const PlanDecision& plan, const Scenario& s) { return plan.destination == s.cavern_index(); }

int route_periods(const PlanDecision& plan, const Scenario& s) { return s.travel(plan.plant, plan.destination); }

double transit_retention(int from, int to, TransportMode mode, const TransportParams& transport) {
  if (mode == TransportMode::kCompressed) return 1.0;
  return std::pow(transport.transit_retention, transport.travel_periods[from][to]);
}

FleetRange fleet_size_bounds(double unit_daily_generation, double vehicle_capacity, int travel_periods) {
  const double loads = std::ceil(unit_daily_generation / vehicle_capacity - 1e-9);
  return {0, static_cast<int>(std::max(0.0, loads)) + 2 * travel_periods + 1};
}

namespace {

double total(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

void check_plans(std::span<const PlanDecision> plans, const Scenario& s, std::map<int, int>& position) {
  const int plants = s.plant_count();
  for (std::size_t k = 0; k < plans.size(); ++k) {
    const PlanDecision& p = plans[k];
    if (p.plant < 0 || p.plant >= plants) throw ModelBuildError("plan references unknown plant");
    if (!position.emplace(p.plant, static_cast<int>(k)).second) {
      throw ModelBuildError(fmt::format("plant {} appears in two plans", p.plant + 1));
    }
    if (p.equipment < 0 || p.equipment >= s.catalog.type_count()) {
      throw ModelBuildError(fmt::format("plant {}: equipment type {} outside the catalog", p.plant + 1, p.equipment));
    }
    if (p.destination < 0 || p.destination > plants || p.destination == p.plant) {
      throw ModelBuildError(fmt::format("plant {}: invalid destination {}", p.plant + 1, p.destination + 1));
    }
    if (p.fleet_size < 0) throw ModelBuildError(fmt::format("plant {}: negative fleet size", p.plant + 1));
  }
  for (const PlanDecision& p : plans) {
    if (p.destination == s.cavern_index()) continue;
    auto it = position.find(p.destination);
    if (it == position.end()) {
      throw ModelBuildError(fmt::format("plant {} ships to plant {} which is not in the model", p.plant + 1,
                                        p.destination + 1));
    }
    if (plans[it->second].destination != s.cavern_index()) {
      throw ModelBuildError(fmt::format("transit hub {} must ship to the cavern", p.destination + 1));
    }
  }
}

const std::vector<double>* external_for(const ModelOptions& options, int plant, int periods) {
  if (plant >= static_cast<int>(options.external_inbound.size())) return nullptr;
  const std::vector<double>& v = options.external_inbound[plant];
  if (v.empty()) return nullptr;
  if (static_cast<int>(v.size()) != periods) {
    throw ModelBuildError(fmt::format("inbound arrivals for plant {} must cover exactly {} periods, got {}", plant + 1,
                                      periods, v.size()));
  }
  return &v;
}

}  // namespace

ScheduleModel build_schedule_model(std::span<const PlanDecision> plans, const Scenario& s,
                                   const PriceSchedule& prices, const ModelOptions& options) {
  const int T = s.periods();
  if (static_cast<int>(prices.prices.size()) != T) throw ModelBuildError("price schedule length must equal T");
  if (!options.reserved_injection.empty() && static_cast<int>(options.reserved_injection.size()) != T) {
    throw ModelBuildError("reserved injection must cover exactly the horizon");
  }
  std::map<int, int> position;
  check_plans(plans, s, position);

  ScheduleModel model;
  model.plans.assign(plans.begin(), plans.end());
  model.vars.resize(plans.size());
  milp::LinearProgram& lp = model.lp;

  const int n_plans = static_cast<int>(plans.size());
  std::vector<double> ship_unit(n_plans);  // delivered kg per departure
  std::vector<int> departure_cap(n_plans);

  for (int k = 0; k < n_plans; ++k) {
    const PlanDecision& p = plans[k];
    const TransportMode mode = mode_of(p, s);
    const double qv = vehicle_capacity(mode, s);
    const double keep = mode == TransportMode::kCompressed ? 1.0 : s.transport.loading_retention;
    const double retention = transit_retention(p.plant, p.destination, mode, s.transport);
    const double cap = processing_capacity(p, s);
    const int travel = route_periods(p, s);
    ship_unit[k] = qv * retention;

    double unit_generation = total(s.plants[p.plant].generation);
    double supply = unit_generation;
    for (const PlanDecision& q : plans) {
      if (q.destination == p.plant) {
        unit_generation += total(s.plants[q.plant].generation);
        supply += total(s.plants[q.plant].generation);
      }
    }
    if (const auto* ext = external_for(options, p.plant, T)) {
      unit_generation += total(*ext);
      supply += total(*ext);
    }
    const double tank_cap =
        s.plants[p.plant].tank_capacity_rule == TankCapacityRule::kEquipmentCapacity ? cap : supply;

    const FleetRange range = options.fleet == FleetMode::kOptimize ? fleet_size_bounds(unit_generation, qv, travel)
                                                                   : FleetRange{p.fleet_size, p.fleet_size};
    departure_cap[k] = std::min(static_cast<int>(std::floor(cap / qv + keep + 1e-9)), range.upper);

    const double revenue_per_departure = ships_to_cavern(p, s) ? ship_unit[k] : 0.0;
    const double trip_cost = s.transport.op_cost_per_period * travel;
    const double energy = energy_per_kg(mode, s);
    const std::string tag = fmt::format("p{}", p.plant + 1);

    PlantVariables& v = model.vars[k];
    for (int t = 0; t < T; ++t) {
      v.processed.push_back(lp.add_variable(0.0, cap, VarType::kContinuous, -s.tariff.electricity_price[t] * energy,
                                            fmt::format("{}_pr_{}", tag, t + 1)));
      v.vehicle_buffer.push_back(lp.add_variable(0.0, qv, VarType::kContinuous, 0.0, fmt::format("{}_store_{}", tag, t + 1)));
      v.tank_buffer.push_back(lp.add_variable(0.0, tank_cap, VarType::kContinuous, 0.0, fmt::format("{}_unpr_{}", tag, t + 1)));
      v.discarded.push_back(lp.add_variable(0.0, supply, VarType::kContinuous, 0.0, fmt::format("{}_discard_{}", tag, t + 1)));
      v.departures.push_back(lp.add_variable(0.0, departure_cap[k],
                                             options.cumulative_departures ? VarType::kContinuous : VarType::kInteger,
                                             prices.prices[t] * revenue_per_departure - trip_cost,
                                             fmt::format("{}_cars_{}", tag, t + 1)));
      if (!options.late_arrivals_paid && ships_to_cavern(p, s) && t + travel >= T) lp.upper[v.departures.back()] = 0.0;
    }
    if (options.cumulative_departures) {
      for (int t = 0; t < T; ++t) {
        v.dispatched.push_back(lp.add_variable(0.0, departure_cap[k] * (t + 1.0), VarType::kInteger, 0.0,
                                               fmt::format("{}_sent_{}", tag, t + 1)));
      }
    }
    const double vehicle_cost = vehicle_invest_daily(mode, s);
    if (options.fleet == FleetMode::kOptimize) {
      v.fleet = lp.add_variable(range.lower, range.upper, VarType::kInteger, -vehicle_cost, tag + "_fleet");
    } else {
      lp.objective_constant -= vehicle_cost * p.fleet_size;
    }
    lp.objective_constant -= s.catalog.invest_daily[p.equipment];
  }

  // fill[k][t]: most full vehicles plan k can have dispatched by period t, from
  // the processing capacity and the most mass that can have reached its tank.
  // Partners are bounded first so hubs can count their best-case deliveries.
  std::vector<std::vector<double>> fill(n_plans);
  auto bound_fill = [&](int k) {
    const PlanDecision& p = plans[k];
    const double cap = processing_capacity(p, s);
    const double qv = vehicle_capacity(mode_of(p, s), s);
    const std::vector<double>* ext = external_for(options, p.plant, T);
    std::vector<double> cum_supply(T);
    double run = 0.0;
    for (int t = 0; t < T; ++t) {
      run += s.plants[p.plant].generation[t] + (ext ? (*ext)[t] : 0.0);
      cum_supply[t] = run;
    }
    for (int j = 0; j < n_plans; ++j) {
      if (plans[j].destination != p.plant) continue;
      const int travel = s.travel(plans[j].plant, p.plant);
      for (int t = travel; t < T; ++t) cum_supply[t] += ship_unit[j] * fill[j][t - travel];
    }
    fill[k].resize(T);
    for (int t = 0; t < T; ++t) {
      double max_processed = cap * (t + 1);
      for (int u = 0; u <= t; ++u) max_processed = std::min(max_processed, cum_supply[u] + cap * (t - u));
      fill[k][t] = std::floor(max_processed / qv + 1e-9);
    }
  };
  for (int k = 0; k < n_plans; ++k) {
    if (!ships_to_cavern(plans[k], s)) bound_fill(k);
  }
  for (int k = 0; k < n_plans; ++k) {
    if (ships_to_cavern(plans[k], s)) bound_fill(k);
  }

  std::vector<std::pair<int, double>> terms;
  for (int k = 0; k < n_plans; ++k) {
    const PlanDecision& p = plans[k];
    const PlantVariables& v = model.vars[k];
    const TransportMode mode = mode_of(p, s);
    const double qv = vehicle_capacity(mode, s);
    const double keep = mode == TransportMode::kCompressed ? 1.0 : s.transport.loading_retention;
    const std::string tag = fmt::format("p{}", p.plant + 1);
    const std::vector<double>* ext = external_for(options, p.plant, T);

    for (int t = 0; t < T; ++t) {
      // Vehicle buffer: full vehicles leave, the remainder waits (and boils off for LH2).
      terms = {{v.vehicle_buffer[t], 1.0}, {v.processed[t], -1.0}, {v.departures[t], qv}};
      if (t > 0) terms.emplace_back(v.vehicle_buffer[t - 1], -keep);
      lp.add_constraint(terms, Relation::kEqual, 0.0, fmt::format("{}_load_{}", tag, t + 1));

      // Tank balance; discarding is the explicit slack.
      terms = {{v.tank_buffer[t], 1.0}, {v.processed[t], 1.0}, {v.discarded[t], 1.0}};
      if (t > 0) terms.emplace_back(v.tank_buffer[t - 1], -1.0);
      for (int j = 0; j < n_plans; ++j) {
        if (plans[j].destination != p.plant) continue;
        const int depart = t - s.travel(plans[j].plant, p.plant);
        if (depart >= 0) terms.emplace_back(model.vars[j].departures[depart], -ship_unit[j]);
      }
      const double rhs = s.plants[p.plant].generation[t] + (ext ? (*ext)[t] : 0.0);
      lp.add_constraint(terms, Relation::kEqual, rhs, fmt::format("{}_tank_{}", tag, t + 1));
    }

    if (options.cumulative_departures) {
      for (int t = 0; t < T; ++t) {
        terms = {{v.dispatched[t], 1.0}, {v.departures[t], -1.0}};
        if (t > 0) terms.emplace_back(v.dispatched[t - 1], -1.0);
        lp.add_constraint(terms, Relation::kEqual, 0.0, fmt::format("{}_sent_{}", tag, t + 1));
        lp.upper[v.dispatched[t]] = std::min(lp.upper[v.dispatched[t]], fill[k][t]);
      }
    }
    for (int t = 0; t < T && !options.cumulative_departures; ++t) {
      if (fill[k][t] >= departure_cap[k] * (t + 1)) continue;
      terms.clear();
      for (int u = 0; u <= t; ++u) terms.emplace_back(v.departures[u], 1.0);
      lp.add_constraint(terms, Relation::kLessEqual, fill[k][t], fmt::format("{}_fill_{}", tag, t + 1));
    }

    // Round trips: departures inside any inclusive window of 2*travel+1 periods
    // cannot exceed the fleet. Windows clipped at t = 1 are nested, so only the
    // first full-length one is kept.
    const int travel = route_periods(p, s);
    const int window = 2 * travel + 1;
    if (!(options.fleet == FleetMode::kFixed && window == 1)) {
      for (int t = std::min(T, window) - 1; t < T; ++t) {
        terms.clear();
        for (int u = std::max(0, t - 2 * travel); u <= t; ++u) terms.emplace_back(v.departures[u], 1.0);
        double rhs = p.fleet_size;
        if (v.fleet >= 0) {
          terms.emplace_back(v.fleet, -1.0);
          rhs = 0.0;
        }
        lp.add_constraint(terms, Relation::kLessEqual, rhs, fmt::format("{}_fleet_{}", tag, t + 1));
      }
    }
  }

  if (options.enforce_injection_cap) {
    for (int t = 0; t < T; ++t) {
      terms.clear();
      double max_lhs = 0.0;
      for (int k = 0; k < n_plans; ++k) {
        if (!ships_to_cavern(plans[k], s)) continue;
        const int depart = t - route_periods(plans[k], s);
        if (depart < 0) continue;
        terms.emplace_back(model.vars[k].departures[depart], ship_unit[k]);
        max_lhs += ship_unit[k] * departure_cap[k];
      }
      const double rhs =
          s.cavern.max_injection - (options.reserved_injection.empty() ? 0.0 : options.reserved_injection[t]);
      if (terms.empty() || max_lhs <= rhs) continue;
      lp.add_constraint(terms, Relation::kLessEqual, rhs, fmt::format("cavern_cap_{}", t + 1));
    }
  }
  return model;
}

std::vector<Schedule> extract_schedules(const ScheduleModel& model, std::span<const double> x, const Scenario& s,
                                        const ModelOptions& options) {
  const int T = s.periods();
  std::vector<Schedule> out(model.plans.size());
  for (std::size_t k = 0; k < model.plans.size(); ++k) {
    const PlanDecision& p = model.plans[k];
    const PlantVariables& v = model.vars[k];
    const double unit = vehicle_capacity(mode_of(p, s), s) *
                        transit_retention(p.plant, p.destination, mode_of(p, s), s.transport);
    Schedule& sch = out[k];
    sch.plant = p.plant;
    sch.fleet_size = v.fleet >= 0 ? static_cast<int>(std::lround(x[v.fleet])) : p.fleet_size;
    for (int t = 0; t < T; ++t) {
      const double cars = std::round(x[v.departures[t]]);
      sch.processed.push_back(std::max(0.0, x[v.processed[t]]));
      sch.vehicle_buffer.push_back(std::max(0.0, x[v.vehicle_buffer[t]]));
      sch.tank_buffer.push_back(std::max(0.0, x[v.tank_buffer[t]]));
      sch.discarded.push_back(std::max(0.0, x[v.discarded[t]]));
      sch.departures.push_back(cars);
      sch.shipped.push_back(cars * unit);
    }
    const std::vector<double>* ext = external_for(options, p.plant, T);
    sch.inbound = ext ? *ext : std::vector<double>(T, 0.0);
  }
  for (std::size_t j = 0; j < model.plans.size(); ++j) {
    const PlanDecision& member = model.plans[j];
    if (ships_to_cavern(member, s)) continue;
    for (std::size_t k = 0; k < model.plans.size(); ++k) {
      if (model.plans[k].plant != member.destination) continue;
      const int travel = s.travel(member.plant, member.destination);
      for (int t = 0; t + travel < T; ++t) out[k].inbound[t + travel] += out[j].shipped[t];
    }
  }
  return out;
}

CostBreakdown cost_breakdown(const Schedule& sch, const PlanDecision& plan, const Scenario& s,
                             const PriceSchedule& prices) {
  const TransportMode mode = mode_of(plan, s);
  const double energy = energy_per_kg(mode, s);
  const double trip_cost = s.transport.op_cost_per_period * route_periods(plan, s);
  const bool sells = ships_to_cavern(plan, s);
  CostBreakdown c;
  for (int t = 0; t < s.periods(); ++t) {
    if (sells) c.revenue += prices.prices[t] * sch.shipped[t];
    c.processing_cost += sch.processed[t] * s.tariff.electricity_price[t] * energy;
    c.transport_cost += sch.departures[t] * trip_cost;
  }
  c.equipment_invest = s.catalog.invest_daily[plan.equipment];
  c.fleet_invest = sch.fleet_size * vehicle_invest_daily(mode, s);
  c.profit = c.revenue - c.processing_cost - c.transport_cost - c.equipment_invest - c.fleet_invest;
  return c;
}

std::vector<double> cavern_arrivals(std::span<const Schedule> schedules, std::span<const PlanDecision> plans,
                                    const Scenario& s) {
  const int T = s.periods();
  std::vector<double> arrivals(T, 0.0);
  for (std::size_t k = 0; k < plans.size(); ++k) {
    if (!ships_to_cavern(plans[k], s)) continue;
    const int travel = route_periods(plans[k], s);
    for (int t = 0; t + travel < T; ++t) arrivals[t + travel] += schedules[k].shipped[t];
  }
  return arrivals;
}

std::string schedules_to_csv(std::span<const Schedule> schedules, std::span<const PlanDecision> plans,
                             const Scenario& s, const PriceSchedule& prices) {
  std::string out =
      "plant,period,price,tariff,processed,shipped,vehicle_buffer,tank_buffer,departures,discarded,inbound,"
      "revenue,processing_cost,transport_cost\n";
  for (std::size_t k = 0; k < schedules.size(); ++k) {
    const Schedule& sch = schedules[k];
    const PlanDecision& plan = plans[k];
    const double energy = energy_per_kg(mode_of(plan, s), s);
    const double trip_cost = s.transport.op_cost_per_period * route_periods(plan, s);
    for (int t = 0; t < s.periods(); ++t) {
      const double revenue = ships_to_cavern(plan, s) ? prices.prices[t] * sch.shipped[t] : 0.0;
      out += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", sch.plant + 1, t + 1, prices.prices[t],
                         s.tariff.electricity_price[t], sch.processed[t], sch.shipped[t], sch.vehicle_buffer[t],
                         sch.tank_buffer[t], sch.departures[t], sch.discarded[t], sch.inbound[t], revenue,
                         sch.processed[t] * s.tariff.electricity_price[t] * energy, sch.departures[t] * trip_cost);
    }
  }
  return out;
}

std::string costs_to_csv(std::span<const CostBreakdown> costs, std::span<const PlanDecision> plans) {
  std::string out =
      "plant,equipment,destination,fleet_size,revenue,processing_cost,transport_cost,equipment_invest,"
      "fleet_invest,profit\n";
  for (std::size_t k = 0; k < costs.size(); ++k) {
    const CostBreakdown& c = costs[k];
    const PlanDecision& p = plans[k];
    out += fmt::format("{},{},{},{},{},{},{},{},{},{}\n", p.plant + 1, p.equipment + 1, p.destination + 1,
                       p.fleet_size, c.revenue, c.processing_cost, c.transport_cost, c.equipment_invest,
                       c.fleet_invest, c.profit);
  }
  return out;
}

}  // namespace h2chain
