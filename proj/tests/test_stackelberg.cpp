#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "doctest.h"
#include "h2chain/stackelberg.hpp"
#include "json.hpp"
#include "schedule_checks.hpp"

using namespace h2chain;

namespace {

Scenario fixture(const char* name) { return load_scenario(std::filesystem::path(H2CHAIN_DATA_DIR) / name); }

bool close(double a, double b, double rel = 1e-9) { return std::abs(a - b) <= rel * std::max(1.0, std::abs(b)); }

double sum(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

// tiny_case with a tariff high enough that processing cost varies across the
// price band, so the followers respond to price.
Scenario elastic_tiny() {
  Scenario s = fixture("tiny_case.json");
  s.tariff.electricity_price = {0.7, 1.2, 0.6};
  return s;
}

// Plant 1 sits three periods from the cavern, plant 2 one period: routing
// through plant 2 saves transit that a single plant would pay.
Scenario far_tiny() {
  Scenario s = fixture("tiny_case.json");
  s.transport.travel_periods = {{0, 0, 3}, {0, 0, 1}};
  return s;
}

// First two periods of tiny_case.
Scenario two_period_tiny() {
  Scenario s = elastic_tiny();
  s.horizon.periods = 2;
  for (auto& p : s.plants) p.generation.resize(2);
  s.tariff.electricity_price.resize(2);
  s.cavern.price_floor.resize(2);
  s.cavern.price_ceiling.resize(2);
  validate(s);
  return s;
}

std::vector<PlanDecision> singleton_plans(const Scenario& s, int equipment) {
  std::vector<PlanDecision> plans;
  for (int i = 0; i < s.plant_count(); ++i) plans.push_back({i, equipment, s.cavern_index(), 4});
  return plans;
}

GAConfig small_ga(std::uint64_t seed = 3) {
  GAConfig c;
  c.population = 16;
  c.generations = 10;
  c.seed = seed;
  c.flat_seeds = {5.0, 7.0, 9.0, 11.0, 13.0};
  return c;
}

// Leader profit rebuilt from the transaction series alone.
double profit_from_series(const EquilibriumReport& r, const Scenario& s) {
  double delivered = 0.0, outlay = 0.0;
  for (std::size_t k = 0; k < r.plans.size(); ++k) {
    if (r.plans[k].destination != s.cavern_index()) continue;
    for (int t = 0; t < s.periods(); ++t) {
      delivered += r.transaction_series[k][t];
      outlay += r.best_prices.prices[t] * r.transaction_series[k][t];
    }
  }
  return s.cavern.retail_price * delivered - outlay;
}

void check_report(const EquilibriumReport& r, const Scenario& s) {
  CHECK(r.response.status == milp::SolveStatus::kOptimal);
  CHECK(r.response.gap <= 1e-6);
  CHECK(r.best_prices.within_bounds(s, 1e-12));
  CHECK(close(r.leader_profit, profit_from_series(r, s)));
  for (int t = 0; t < s.periods(); ++t) {
    double arriving = 0.0;
    for (std::size_t k = 0; k < r.plans.size(); ++k) {
      if (r.plans[k].destination != s.cavern_index()) continue;
      const int depart = t - s.travel(r.plans[k].plant, s.cavern_index());
      if (depart >= 0) arriving += r.transaction_series[k][depart];
    }
    CHECK(r.injection_series[t] == doctest::Approx(arriving).epsilon(1e-9));
    CHECK(arriving <= s.cavern.max_injection + 1e-6);
  }
  CHECK(testing::schedule_violations(s, r.plans, r.schedules).empty());
}

}  // namespace

TEST_CASE("arrival convention and sensitivity names") {
  CHECK(parse_arrival_convention("departure") == ArrivalConvention::kDayBoundary);
  CHECK(parse_arrival_convention("day-boundary") == ArrivalConvention::kDayBoundary);
  CHECK(std::string(to_string(ArrivalConvention::kDayBoundary)) == "departure");
  CHECK(parse_arrival_convention("strict") == ArrivalConvention::kStrictHorizon);
  CHECK(std::string(to_string(ArrivalConvention::kStrictHorizon)) == "strict");
  CHECK_THROWS_AS(parse_arrival_convention("Strict"), std::invalid_argument);
  CHECK(parse_sensitivity_parameter("K3") == SensitivityParameter::kOperatingCost);
  CHECK(parse_sensitivity_parameter("Qtrans") == SensitivityParameter::kInjectionCap);
  CHECK(std::string(to_string(SensitivityParameter::kInjectionCap)) == "Qtrans");
  CHECK_THROWS_AS(parse_sensitivity_parameter("K_3"), std::invalid_argument);
}

TEST_CASE("GA configuration checks") {
  CHECK_NOTHROW(validate(GAConfig{}));
  auto bad = [](auto edit) {
    GAConfig c;
    edit(c);
    CHECK_THROWS_AS(validate(c), std::invalid_argument);
  };
  bad([](GAConfig& c) { c.population = 1; });
  bad([](GAConfig& c) { c.generations = -1; });
  bad([](GAConfig& c) { c.crossover_rate = 1.5; });
  bad([](GAConfig& c) { c.mutation_rate = -0.1; });
  bad([](GAConfig& c) { c.mutation_scale = -1.0; });
  bad([](GAConfig& c) { c.elitism = 60; });
  bad([](GAConfig& c) { c.threads = 0; });
  const Scenario s = fixture("tiny_case.json");
  GAConfig c = small_ga();
  c.elitism = c.population;
  CHECK_THROWS_AS(optimize_prices(s, singleton_plans(s, 0), c), std::invalid_argument);
}

TEST_CASE("flat grid spans the common band") {
  Scenario s = fixture("tiny_case.json");
  const auto grid = default_flat_grid(s);
  REQUIRE(grid.size() == 17);
  CHECK(grid.front() == 5.0);
  CHECK(grid.back() == 13.0);
  CHECK(grid[8] == doctest::Approx(9.0));
  s.cavern.price_floor = {5.0, 6.0, 5.0};
  s.cavern.price_ceiling = {13.0, 13.0, 12.0};
  const auto narrow = default_flat_grid(s, 3);
  REQUIRE(narrow.size() == 3);
  CHECK(narrow[0] == 6.0);
  CHECK(narrow[2] == 12.0);
}

TEST_CASE("processing dearer than the floor price: nothing ships") {
  Scenario s = fixture("tiny_case.json");
  s.tariff.electricity_price = {6.0, 6.0, 6.0};  // CH2 costs 6 $/kg, LH2 far more
  for (int equipment : {0, 1}) {
    const auto plans = singleton_plans(s, equipment);
    const PriceSchedule floor = PriceSchedule::floor_of(s);
    const FollowerResponse r = follower_best_response(floor, plans, s);
    for (std::size_t k = 0; k < plans.size(); ++k) {
      CHECK(sum(r.schedules[k].shipped) == 0.0);
      CHECK(r.costs[k].profit == doctest::Approx(-(r.costs[k].equipment_invest + r.costs[k].fleet_invest)));
    }
    CHECK(leader_fitness(floor, s, plans) == 0.0);
  }
}

TEST_CASE("buying at the retail price earns the cavern nothing") {
  Scenario s = fixture("tiny_case.json");
  s.cavern.price_ceiling = {15.0, 15.0, 15.0};
  const auto plans = singleton_plans(s, 1);
  const PriceSchedule retail = PriceSchedule::flat(3, 15.0);
  const FollowerResponse r = follower_best_response(retail, plans, s);
  CHECK(sum(r.schedules[0].shipped) + sum(r.schedules[1].shipped) > 0.0);
  CHECK(leader_profit(r.schedules, plans, retail, s) == doctest::Approx(0.0).epsilon(1e-12));
  const auto sweep = fixed_price_sweep(s, plans, {15.0});
  REQUIRE(sweep.size() == 1);
  CHECK(sweep[0].leader_profit == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(sweep[0].total_volume > 0.0);
  CHECK_THROWS_AS(fixed_price_sweep(s, plans, {15.5}), std::invalid_argument);
  CHECK_THROWS_AS(follower_best_response(PriceSchedule::flat(3, 4.0), plans, s), std::invalid_argument);
}

TEST_CASE("ceiling prices, lossless tubes, free trips: everything processable ships") {
  Scenario s = fixture("tiny_case.json");
  s.transport.loading_retention = 1.0;
  s.transport.transit_retention = 1.0;
  s.transport.op_cost_per_period = 0.0;
  auto plans = singleton_plans(s, 0);  // 300 kg/h compressors, 100 kg tubes
  for (PlanDecision& p : plans) p.fleet_size = 12;  // a tube makes one round trip in the horizon
  const FollowerResponse r = follower_best_response(PriceSchedule::ceiling_of(s), plans, s);
  // Generation 600 and 900 kg fits the compressors (plant 2 buffers 20 kg of
  // its 320 kg peak in the tank) and fills 6 and 9 tubes exactly.
  CHECK(sum(r.schedules[0].shipped) == doctest::Approx(600.0));
  CHECK(sum(r.schedules[1].shipped) == doctest::Approx(900.0));
  for (const Schedule& sch : r.schedules) CHECK(sum(sch.discarded) == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(testing::schedule_violations(s, plans, r.schedules).empty());
}

TEST_CASE("follower response agrees with the lattice oracle on tiny_case") {
  const Scenario base = fixture("tiny_case.json");
  const int cavern = base.cavern_index();
  const std::vector<std::vector<PlanDecision>> plan_sets = {
      {{0, 0, cavern, 3}, {1, 0, cavern, 4}},
      {{0, 1, cavern, 2}, {1, 1, cavern, 2}},
      {{0, 0, 1, 4}, {1, 1, cavern, 2}},
  };
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> price(5.0, 13.0);
  for (Scenario s : {base, elastic_tiny()}) {
    for (const auto& plans : plan_sets) {
      for (ArrivalConvention convention : {ArrivalConvention::kDayBoundary, ArrivalConvention::kStrictHorizon}) {
        const PriceSchedule prices{{price(rng), price(rng), price(rng)}};
        FollowerOptions options;
        options.convention = convention;
        const FollowerResponse r = follower_best_response(prices, plans, s, options);

        ModelOptions m;
        m.fleet = FleetMode::kFixed;
        m.late_arrivals_paid = convention == ArrivalConvention::kDayBoundary;
        const ScheduleModel model = build_schedule_model(plans, s, prices, m);
        const milp::SolveResult oracle = milp::brute_force_oracle(model.lp);
        REQUIRE(oracle.status == milp::SolveStatus::kOptimal);
        CHECK(r.objective == doctest::Approx(oracle.objective_value).epsilon(1e-9));
        CHECK(testing::schedule_violations(s, plans, r.schedules).empty());
      }
    }
  }
}

TEST_CASE("strict horizon forbids late cavern arrivals and never pays more") {
  const Scenario s = elastic_tiny();
  const auto plans = singleton_plans(s, 1);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> price(5.0, 13.0);
  for (int trial = 0; trial < 4; ++trial) {
    const PriceSchedule prices{{price(rng), price(rng), price(rng)}};
    FollowerOptions strict;
    strict.convention = ArrivalConvention::kStrictHorizon;
    const FollowerResponse a = follower_best_response(prices, plans, s);
    const FollowerResponse b = follower_best_response(prices, plans, s, strict);
    CHECK(b.objective <= a.objective + 1e-6);
    for (const Schedule& sch : b.schedules) CHECK(sch.shipped[2] == 0.0);  // one period from the cavern
    const EquilibriumReport r = evaluate_prices(prices, s, plans, strict);
    CHECK(r.convention == ArrivalConvention::kStrictHorizon);
    double shipped = 0.0;
    for (const auto& series : r.transaction_series) shipped += sum(series);
    CHECK(sum(r.injection_series) == doctest::Approx(shipped));  // every shipment lands in the horizon
  }
}

TEST_CASE("unproven follower solves are reported as errors") {
  const Scenario s = fixture("paper_case.json");
  const std::vector<PlanDecision> plans = {{0, 0, 3, 46}, {1, 0, 3, 55}, {2, 2, 3, 7}};
  Scenario capped = s;
  capped.cavern.max_injection = 6000.0;
  FollowerOptions options;
  options.milp.node_limit = 1;
  std::vector<double> p(12);
  for (int t = 0; t < 12; ++t) p[t] = 5.0 + 0.6 * t;
  try {
    follower_best_response(PriceSchedule{p}, plans, capped, options);
    FAIL("expected FollowerSolveError");
  } catch (const FollowerSolveError& e) {
    CHECK(e.status == milp::SolveStatus::kGapLimit);
    CHECK(e.gap > 1e-6);
    CHECK(e.nodes >= 1);
  }
}

TEST_CASE("evaluate_prices: leader profit identity and arrival cap") {
  const Scenario s = elastic_tiny();
  const int cavern = s.cavern_index();
  const std::vector<std::vector<PlanDecision>> plan_sets = {
      singleton_plans(s, 0), singleton_plans(s, 1), {{0, 0, 1, 4}, {1, 1, cavern, 3}}};
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> price(5.0, 13.0);
  for (const auto& plans : plan_sets) {
    const PriceSchedule prices{{price(rng), price(rng), price(rng)}};
    const EquilibriumReport r = evaluate_prices(prices, s, plans);
    check_report(r, s);
    CHECK(r.leader_profit == doctest::Approx(leader_fitness(prices, s, plans)).epsilon(1e-12));
    double followers = 0.0;
    for (double f : r.follower_profits) followers += f;
    CHECK(followers == doctest::Approx(r.response.objective));
  }
  Scenario tight = s;
  tight.cavern.max_injection = 400.0;
  check_report(evaluate_prices(PriceSchedule::ceiling_of(tight), tight, singleton_plans(tight, 0)), tight);
}

TEST_CASE("degenerate band: the only schedule is returned from generation 0") {
  Scenario s = elastic_tiny();
  s.cavern.price_floor = {7.0, 8.5, 9.0};
  s.cavern.price_ceiling = s.cavern.price_floor;
  const auto plans = singleton_plans(s, 1);
  const EquilibriumReport r = optimize_prices(s, plans, small_ga());
  CHECK(r.best_prices.prices == s.cavern.price_floor);
  CHECK(r.evaluations == 1);
  REQUIRE(r.fitness_history.size() == 11);
  for (double f : r.fitness_history) CHECK(f == r.leader_profit);
  CHECK(r.leader_profit == doctest::Approx(leader_fitness(PriceSchedule{s.cavern.price_floor}, s, plans)));
}

TEST_CASE("GA: monotone history, determinism, thread independence") {
  const Scenario s = elastic_tiny();
  const auto plans = singleton_plans(s, 1);
  const EquilibriumReport a = optimize_prices(s, plans, small_ga(9));
  GAConfig threaded = small_ga(9);
  threaded.threads = 3;
  const EquilibriumReport b = optimize_prices(s, plans, threaded);
  const EquilibriumReport c = optimize_prices(s, plans, small_ga(9));

  REQUIRE(a.fitness_history.size() == 11);
  CHECK(std::is_sorted(a.fitness_history.begin(), a.fitness_history.end()));
  CHECK(a.fitness_history.back() == a.leader_profit);
  for (const EquilibriumReport* other : {&b, &c}) {
    CHECK(other->best_prices == a.best_prices);
    CHECK(other->fitness_history == a.fitness_history);
    CHECK(other->leader_profit == a.leader_profit);
    CHECK(other->evaluations == a.evaluations);
    CHECK(other->transaction_series == a.transaction_series);
  }
  check_report(a, s);
  // TOU containment: the flat seeds are in generation 0.
  const auto sweep = fixed_price_sweep(s, plans, small_ga().flat_seeds);
  CHECK(a.leader_profit >= sweep[best_sweep_point(sweep)].leader_profit - 1e-9);
}

TEST_CASE("tiny_case: TOU search is at least the best flat price") {
  const Scenario s = fixture("tiny_case.json");
  for (int equipment : {0, 1}) {
    const auto plans = singleton_plans(s, equipment);
    GAConfig c = small_ga();
    c.flat_seeds.clear();  // default 17-point grid
    const EquilibriumReport r = optimize_prices(s, plans, c);
    const auto sweep = fixed_price_sweep(s, plans, default_flat_grid(s));
    const int best = best_sweep_point(sweep);
    REQUIRE(best >= 0);
    CHECK(r.leader_profit >= sweep[best].leader_profit - 1e-9);
    CHECK(r.fitness_history.front() >= sweep[best].leader_profit - 1e-9);
    check_report(r, s);
  }
  CHECK(best_sweep_point({}) == -1);
  CHECK(best_sweep_point({{5.0, 1.0, 0.0}, {6.0, 2.0, 0.0}, {7.0, 2.0, 0.0}}) == 1);
}

TEST_CASE("two periods: GA beats exhaustive search over a coarse lattice") {
  const Scenario s = two_period_tiny();
  const auto plans = singleton_plans(s, 1);
  double grid_best = -milp::kInfinity;
  for (double p0 = 5.0; p0 <= 13.0; p0 += 1.0) {
    for (double p1 = 5.0; p1 <= 13.0; p1 += 1.0) {
      grid_best = std::max(grid_best, leader_fitness(PriceSchedule{{p0, p1}}, s, plans));
    }
  }
  GAConfig c;
  c.population = 24;
  c.generations = 25;
  c.seed = 4;
  const EquilibriumReport r = optimize_prices(s, plans, c);
  CHECK(r.leader_profit >= grid_best - 1e-9);
  check_report(r, s);
}

TEST_CASE("injection cap sweep: constant once the cap is slack") {
  const Scenario s = fixture("tiny_case.json");
  const auto plans = singleton_plans(s, 1);
  SensitivityOptions options;
  options.ga = small_ga();
  const auto points = sensitivity_sweep(s, SensitivityParameter::kInjectionCap, {5000.0, 20000.0, 1e6}, plans,
                                        "{1},{2}", options);
  REQUIRE(points.size() == 3);
  for (const SensitivityPoint& p : points) {
    CHECK(p.scheduled);
    CHECK(p.structure == "{1},{2}");
    CHECK(p.structures.empty());
    CHECK(p.equilibrium.leader_profit == doctest::Approx(points[0].equilibrium.leader_profit).epsilon(1e-12));
  }
}

TEST_CASE("injection cap sweep: a tighter cap never helps the cavern") {
  const Scenario s = elastic_tiny();
  const auto plans = singleton_plans(s, 0);
  SensitivityOptions options;
  options.ga = small_ga();
  const auto points =
      sensitivity_sweep(s, SensitivityParameter::kInjectionCap, {200.0, 400.0, 800.0}, plans, "{1},{2}", options);
  for (std::size_t k = 0; k < points.size(); ++k) {
    Scenario capped = s;
    capped.cavern.max_injection = points[k].value;
    check_report(points[k].equilibrium, capped);
    if (k > 0) CHECK(points[k].equilibrium.leader_profit >= points[k - 1].equilibrium.leader_profit - 1e-9);
  }
}

TEST_CASE("operating-cost sweep: coalition surplus and its break-even point") {
  Scenario s = far_tiny();
  auto surplus = [&](double k3) {
    s.transport.op_cost_per_period = k3;
    return coalition_value({0, 1}, s) - coalition_value({0}, s) - coalition_value({1}, s);
  };
  // Hub routing saves two transit periods per trip, so the surplus shrinks as
  // K3 falls toward 0 and turns negative.
  double previous = -milp::kInfinity;
  for (double k3 : {0.0, 50.0, 100.0, 200.0, 400.0, 800.0}) {
    const double v = surplus(k3);
    CHECK(v >= previous - 1e-6);
    previous = v;
  }
  double lo = 0.0, hi = 800.0;
  REQUIRE(surplus(lo) < 0.0);
  REQUIRE(surplus(hi) > 0.0);
  while (hi - lo > 1.0) {
    const double mid = 0.5 * (lo + hi);
    (surplus(mid) > 0.0 ? hi : lo) = mid;
  }
  CHECK(lo > 0.0);
  CHECK(hi < 800.0);

  SensitivityOptions options;
  options.run_scheduling = false;
  const auto points =
      sensitivity_sweep(far_tiny(), SensitivityParameter::kOperatingCost, {lo - 1.0, hi + 1.0}, {}, "", options);
  REQUIRE(points.size() == 2);
  for (const SensitivityPoint& p : points) {
    CHECK(p.structures.size() == 3);
    CHECK(!p.scheduled);
    CHECK(!p.stable_structures.empty());
    CHECK(p.cooperation_gain >= 0.0);
    CHECK(std::find(p.stable_structures.begin(), p.stable_structures.end(), p.structure) !=
          p.stable_structures.end());
  }
  CHECK(points[0].structure == "{1},{2}");
  CHECK(points[0].cooperation_gain == 0.0);
  CHECK(points[1].structure != "{1},{2}");
  CHECK(points[1].cooperation_gain > 0.0);
}

TEST_CASE("operating-cost sweep schedules the chosen structure") {
  SensitivityOptions options;
  options.ga = small_ga();
  options.ga.generations = 3;
  const auto points = sensitivity_sweep(far_tiny(), SensitivityParameter::kOperatingCost, {800.0}, {}, "", options);
  REQUIRE(points.size() == 1);
  const SensitivityPoint& p = points[0];
  REQUIRE(p.scheduled);
  Scenario s = far_tiny();
  s.transport.op_cost_per_period = 800.0;
  check_report(p.equilibrium, s);
  double blocks = 0.0;
  for (double v : p.block_values) blocks += v;
  const auto chosen = std::find_if(p.structures.begin(), p.structures.end(),
                                   [&](const StructureValue& v) { return v.structure.label() == p.structure; });
  REQUIRE(chosen != p.structures.end());
  CHECK(blocks == doctest::Approx(chosen->total));
  CHECK(p.equilibrium.plans.size() == chosen->plans.size());
}

TEST_CASE("select_structure prefers stable, then best total") {
  const Scenario s = fixture("tiny_case.json");
  std::vector<StructureValue> values;
  std::vector<StructureRecord> records;
  for (const CoalitionStructure& c : enumerate_structures(2)) {
    StructureValue v;
    v.structure = c;
    values.push_back(v);
  }
  values[0].total = 10.0;
  values[1].total = 30.0;
  values[2].total = 20.0;
  std::vector<StabilityVerdict> verdicts(3);
  for (std::size_t k = 0; k < 3; ++k) verdicts[k].label = values[k].structure.label();
  verdicts[1].dominated_by = 2;
  CHECK(&select_structure(values, verdicts) == &values[2]);
  verdicts[0].dominated_by = verdicts[1].dominated_by = verdicts[2].dominated_by = 1;
  CHECK(&select_structure(values, verdicts) == &values[1]);
  verdicts.pop_back();
  CHECK_THROWS_AS(select_structure(values, verdicts), std::invalid_argument);
}

TEST_CASE("paper_case equilibrium regression") {
  std::ifstream in(std::filesystem::path(H2CHAIN_DATA_DIR) / "paper_case_equilibrium.json");
  REQUIRE(in);
  const auto ref = nlohmann::json::parse(in);
  const Scenario s = fixture("paper_case.json");
  REQUIRE(ref.at("scenario_fingerprint") == scenario_fingerprint(s));

  std::vector<PlanDecision> plans;
  for (const auto& p : ref.at("plans")) {
    plans.push_back({p.at("plant").get<int>(), p.at("equipment").get<int>(), p.at("destination").get<int>(),
                     p.at("fleet_size").get<int>()});
  }
  PriceSchedule prices;
  prices.prices = ref.at("best_prices").get<std::vector<double>>();
  const EquilibriumReport r = evaluate_prices(prices, s, plans);
  CHECK(close(r.leader_profit, ref.at("leader_profit").get<double>(), 1e-6));
  const auto followers = ref.at("follower_profits").get<std::vector<double>>();
  REQUIRE(r.follower_profits.size() == followers.size());
  for (std::size_t k = 0; k < followers.size(); ++k) CHECK(close(r.follower_profits[k], followers[k], 1e-6));
  check_report(r, s);
}
