#include "h2chain/stackelberg.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <stdexcept>
#include <thread>

#include <fmt/format.h>

namespace h2chain {

namespace {

ModelOptions follower_model_options(const FollowerOptions& options) {
  ModelOptions m;
  m.fleet = FleetMode::kFixed;
  m.late_arrivals_paid = options.convention == ArrivalConvention::kDayBoundary;
  return m;
}

// Independent stream per (generation, slot) so that results do not depend on
// evaluation order or thread count.
std::mt19937_64 substream(std::uint64_t seed, int generation, int slot) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(generation), static_cast<std::uint32_t>(slot)};
  return std::mt19937_64(seq);
}

PriceSchedule clip(PriceSchedule p, const Scenario& s) {
  for (int t = 0; t < s.periods(); ++t) p.prices[t] = std::clamp(p.prices[t], s.cavern.price_floor[t], s.cavern.price_ceiling[t]);
  return p;
}

double cavern_bound_volume(const std::vector<Schedule>& schedules, const std::vector<PlanDecision>& plans,
                           const Scenario& s) {
  double v = 0.0;
  for (std::size_t k = 0; k < plans.size(); ++k) {
    if (!ships_to_cavern(plans[k], s)) continue;
    for (double q : schedules[k].shipped) v += q;
  }
  return v;
}

// Evaluates every schedule not yet in the cache, spread over `threads` workers.
void evaluate_batch(const std::vector<PriceSchedule>& batch, std::map<std::vector<double>, double>& cache,
                    const Scenario& s, const std::vector<PlanDecision>& plans, const FollowerOptions& options,
                    int threads) {
  std::vector<const PriceSchedule*> todo;
  for (const PriceSchedule& p : batch) {
    if (cache.count(p.prices)) continue;
    if (std::none_of(todo.begin(), todo.end(), [&](const PriceSchedule* q) { return q->prices == p.prices; })) {
      todo.push_back(&p);
    }
  }
  std::vector<double> fitness(todo.size());
  std::vector<std::exception_ptr> errors(todo.size());
  auto work = [&](std::size_t first, std::size_t stride) {
    for (std::size_t k = first; k < todo.size(); k += stride) {
      try {
        fitness[k] = leader_fitness(*todo[k], s, plans, options);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(threads, todo.size()));
  if (workers == 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work, w, workers);
    for (std::thread& t : pool) t.join();
  }
  for (std::size_t k = 0; k < todo.size(); ++k) {
    if (errors[k]) std::rethrow_exception(errors[k]);
    cache[todo[k]->prices] = fitness[k];
  }
}

}  // namespace

const char* to_string(ArrivalConvention convention) {
  return convention == ArrivalConvention::kDayBoundary ? "departure" : "strict";
}

ArrivalConvention parse_arrival_convention(const std::string& text) {
  if (text == "departure" || text == "day-boundary") return ArrivalConvention::kDayBoundary;
  if (text == "strict") return ArrivalConvention::kStrictHorizon;
  throw std::invalid_argument("arrival convention must be 'departure' or 'strict', got '" + text + "'");
}

FollowerResponse follower_best_response(const PriceSchedule& prices, const std::vector<PlanDecision>& plans,
                                        const Scenario& s, const FollowerOptions& options) {
  if (!prices.within_bounds(s, 1e-9)) throw std::invalid_argument("follower_best_response: prices outside the band");
  const ModelOptions model_options = follower_model_options(options);
  const ScheduleModel model = build_schedule_model(plans, s, prices, model_options);
  const milp::SolveResult r = milp::solve_milp(model.lp, options.milp);
  if (r.status != milp::SolveStatus::kOptimal) {
    const double gap = r.has_solution() ? r.relative_gap() : milp::kInfinity;
    throw FollowerSolveError(fmt::format("follower model not solved to optimality: status {}, gap {:.3g} after {} nodes",
                                         milp::to_string(r.status), gap, r.stats.nodes),
                             r.status, gap, r.stats.nodes);
  }
  FollowerResponse out;
  out.status = r.status;
  out.nodes = r.stats.nodes;
  out.gap = r.relative_gap();
  out.schedules = extract_schedules(model, r.assignment, s, model_options);
  for (std::size_t k = 0; k < plans.size(); ++k) {
    out.costs.push_back(cost_breakdown(out.schedules[k], plans[k], s, prices));
    out.objective += out.costs.back().profit;
  }
  return out;
}

double leader_profit(const std::vector<Schedule>& schedules, const std::vector<PlanDecision>& plans,
                     const PriceSchedule& prices, const Scenario& s) {
  double profit = 0.0;
  for (std::size_t k = 0; k < plans.size(); ++k) {
    if (!ships_to_cavern(plans[k], s)) continue;
    const Schedule& sch = schedules[k];
    for (int t = 0; t < s.periods(); ++t) profit += (s.cavern.retail_price - prices.prices[t]) * sch.shipped[t];
  }
  return profit;
}

double leader_fitness(const PriceSchedule& prices, const Scenario& s, const std::vector<PlanDecision>& plans,
                      const FollowerOptions& options) {
  const FollowerResponse r = follower_best_response(prices, plans, s, options);
  return leader_profit(r.schedules, plans, prices, s);
}

void validate(const GAConfig& c) {
  auto fail = [](const std::string& what) { throw std::invalid_argument("GA configuration: " + what); };
  if (c.population < 2) fail("population must be at least 2");
  if (c.generations < 0) fail("generations must be non-negative");
  if (!(c.crossover_rate >= 0.0 && c.crossover_rate <= 1.0)) fail("crossover rate must lie in [0, 1]");
  if (!(c.mutation_rate >= 0.0 && c.mutation_rate <= 1.0)) fail("mutation rate must lie in [0, 1]");
  if (!(c.mutation_scale >= 0.0) || !std::isfinite(c.mutation_scale)) fail("mutation scale must be non-negative");
  if (c.elitism < 0 || c.elitism >= c.population) fail("elitism must lie in [0, population)");
  if (c.threads < 1) fail("threads must be at least 1");
}

std::vector<double> default_flat_grid(const Scenario& s, int points) {
  const double lo = *std::max_element(s.cavern.price_floor.begin(), s.cavern.price_floor.end());
  const double hi = *std::min_element(s.cavern.price_ceiling.begin(), s.cavern.price_ceiling.end());
  if (points < 1 || lo > hi) return {};
  if (points == 1 || lo == hi) return {lo};
  std::vector<double> grid;
  for (int k = 0; k < points; ++k) grid.push_back(lo + (hi - lo) * k / (points - 1));
  return grid;
}

EquilibriumReport evaluate_prices(const PriceSchedule& prices, const Scenario& s, const std::vector<PlanDecision>& plans,
                                  const FollowerOptions& options) {
  EquilibriumReport out;
  out.best_prices = prices;
  out.plans = plans;
  out.convention = options.convention;
  out.response = follower_best_response(prices, plans, s, options);
  out.schedules = out.response.schedules;
  out.costs = out.response.costs;
  out.leader_profit = leader_profit(out.schedules, plans, prices, s);
  for (std::size_t k = 0; k < plans.size(); ++k) {
    out.follower_profits.push_back(out.costs[k].profit);
    out.transaction_series.push_back(out.schedules[k].shipped);
    out.discarded_series.push_back(out.schedules[k].discarded);
  }
  out.injection_series = cavern_arrivals(out.schedules, plans, s);
  out.evaluations = 1;
  return out;
}

EquilibriumReport optimize_prices(const Scenario& s, const std::vector<PlanDecision>& plans, const GAConfig& config,
                                  const FollowerOptions& options) {
  validate(config);
  const int T = s.periods();
  const int P = config.population;

  // Generation 0: floor, ceiling, flat grid, extra seeds, then random fill.
  std::vector<PriceSchedule> seeds{PriceSchedule::floor_of(s), PriceSchedule::ceiling_of(s)};
  for (double f : config.flat_seeds.empty() ? default_flat_grid(s) : config.flat_seeds) {
    seeds.push_back(clip(PriceSchedule::flat(T, f), s));
  }
  for (const PriceSchedule& p : config.extra_seeds) {
    if (static_cast<int>(p.prices.size()) != T) throw std::invalid_argument("seed schedule has the wrong length");
    seeds.push_back(clip(p, s));
  }
  std::vector<PriceSchedule> population;
  for (const PriceSchedule& p : seeds) {
    if (static_cast<int>(population.size()) == P) break;
    if (std::none_of(population.begin(), population.end(), [&](const PriceSchedule& q) { return q == p; })) {
      population.push_back(p);
    }
  }
  for (int slot = static_cast<int>(population.size()); slot < P; ++slot) {
    std::mt19937_64 rng = substream(config.seed, 0, slot);
    PriceSchedule p;
    for (int t = 0; t < T; ++t) {
      p.prices.push_back(std::uniform_real_distribution<double>(s.cavern.price_floor[t], s.cavern.price_ceiling[t])(rng));
    }
    population.push_back(clip(p, s));
  }

  std::map<std::vector<double>, double> cache;
  auto fitness_of = [&](const PriceSchedule& p) { return cache.at(p.prices); };
  auto ranking = [&]() {
    std::vector<int> order(P);
    for (int k = 0; k < P; ++k) order[k] = k;
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return fitness_of(population[a]) > fitness_of(population[b]); });
    return order;
  };

  EquilibriumReport report;
  evaluate_batch(population, cache, s, plans, options, config.threads);
  std::vector<int> order = ranking();
  report.fitness_history.push_back(fitness_of(population[order[0]]));
  if (config.on_generation) config.on_generation(0, report.fitness_history.back());

  for (int g = 1; g <= config.generations; ++g) {
    std::vector<PriceSchedule> next;
    for (int e = 0; e < config.elitism; ++e) next.push_back(population[order[e]]);
    for (int slot = static_cast<int>(next.size()); slot < P; ++slot) {
      std::mt19937_64 rng = substream(config.seed, g, slot);
      std::uniform_int_distribution<int> pick(0, P - 1);
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      auto tournament = [&]() -> const PriceSchedule& {
        const int a = pick(rng);
        const int b = pick(rng);
        const double fa = fitness_of(population[a]);
        const double fb = fitness_of(population[b]);
        return (fa > fb || (fa == fb && a <= b)) ? population[a] : population[b];
      };
      const PriceSchedule& first = tournament();
      const PriceSchedule& second = tournament();
      PriceSchedule child = first;
      if (unit(rng) < config.crossover_rate) {
        for (int t = 0; t < T; ++t) {
          if (unit(rng) < 0.5) child.prices[t] = second.prices[t];
        }
      }
      std::normal_distribution<double> noise(0.0, config.mutation_scale);
      for (int t = 0; t < T; ++t) {
        if (unit(rng) < config.mutation_rate) child.prices[t] += noise(rng);
      }
      next.push_back(clip(child, s));
    }
    population = std::move(next);
    evaluate_batch(population, cache, s, plans, options, config.threads);
    order = ranking();
    report.fitness_history.push_back(fitness_of(population[order[0]]));
    if (config.on_generation) config.on_generation(g, report.fitness_history.back());
  }

  std::vector<double> history = std::move(report.fitness_history);
  report = evaluate_prices(population[order[0]], s, plans, options);
  report.fitness_history = std::move(history);
  report.evaluations = static_cast<std::int64_t>(cache.size());
  return report;
}

std::vector<SweepPoint> fixed_price_sweep(const Scenario& s, const std::vector<PlanDecision>& plans,
                                          const std::vector<double>& grid, const FollowerOptions& options) {
  std::vector<SweepPoint> out;
  for (double price : grid) {
    const PriceSchedule p = PriceSchedule::flat(s.periods(), price);
    if (!p.within_bounds(s)) throw std::invalid_argument(fmt::format("flat price {} lies outside the band", price));
    const FollowerResponse r = follower_best_response(p, plans, s, options);
    out.push_back({price, leader_profit(r.schedules, plans, p, s), cavern_bound_volume(r.schedules, plans, s)});
  }
  return out;
}

int best_sweep_point(const std::vector<SweepPoint>& sweep) {
  int best = -1;
  for (std::size_t k = 0; k < sweep.size(); ++k) {
    if (best < 0 || sweep[k].leader_profit > sweep[best].leader_profit) best = static_cast<int>(k);
  }
  return best;
}

SensitivityParameter parse_sensitivity_parameter(const std::string& text) {
  if (text == "K3") return SensitivityParameter::kOperatingCost;
  if (text == "Qtrans") return SensitivityParameter::kInjectionCap;
  throw std::invalid_argument("sensitivity parameter must be K3 or Qtrans, got '" + text + "'");
}

const char* to_string(SensitivityParameter parameter) {
  return parameter == SensitivityParameter::kOperatingCost ? "K3" : "Qtrans";
}

const StructureValue& select_structure(const std::vector<StructureValue>& values,
                                       const std::vector<StabilityVerdict>& verdicts) {
  if (values.empty() || values.size() != verdicts.size()) throw std::invalid_argument("select_structure: size mismatch");
  int best = -1;
  for (int pass = 0; pass < 2 && best < 0; ++pass) {
    for (std::size_t k = 0; k < values.size(); ++k) {
      if (pass == 0 && !verdicts[k].stable()) continue;
      if (best < 0 || values[k].total > values[best].total) best = static_cast<int>(k);
    }
  }
  return values[best];
}

std::vector<SensitivityPoint> sensitivity_sweep(const Scenario& base, SensitivityParameter parameter,
                                                const std::vector<double>& values,
                                                const std::vector<PlanDecision>& plans, const std::string& structure,
                                                const SensitivityOptions& options) {
  std::vector<SensitivityPoint> out;
  std::vector<PriceSchedule> earlier_best;
  for (double value : values) {
    Scenario s = base;
    if (parameter == SensitivityParameter::kOperatingCost) s.transport.op_cost_per_period = value;
    else s.cavern.max_injection = value;
    validate(s);

    SensitivityPoint point;
    point.value = value;
    std::vector<PlanDecision> scheduled_plans = plans;
    if (parameter == SensitivityParameter::kOperatingCost) {
      std::vector<StructureRecord> records;
      for (const CoalitionStructure& c : enumerate_structures(s.plant_count())) {
        point.structures.push_back(solve_planning(c, s, options.planning));
        records.push_back({c, point.structures.back().block_values});
      }
      const auto verdicts = stability_report(records);
      for (const StabilityVerdict& v : verdicts) {
        if (v.stable()) point.stable_structures.push_back(v.label);
      }
      const StructureValue& chosen = select_structure(point.structures, verdicts);
      point.structure = chosen.structure.label();
      point.block_values = chosen.block_values;
      scheduled_plans = chosen.plans;
      double best_total = point.structures.front().total;
      for (const StructureValue& v : point.structures) best_total = std::max(best_total, v.total);
      point.cooperation_gain = best_total - point.structures.front().total;
    } else {
      point.structure = structure;
    }
    if (options.run_scheduling) {
      GAConfig ga = options.ga;
      ga.extra_seeds.insert(ga.extra_seeds.end(), earlier_best.begin(), earlier_best.end());
      point.equilibrium = optimize_prices(s, scheduled_plans, ga, options.follower);
      point.scheduled = true;
      earlier_best.push_back(point.equilibrium.best_prices);
    }
    out.push_back(std::move(point));
  }
  return out;
}

}  // namespace h2chain
