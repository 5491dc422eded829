#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "doctest.h"
#include "h2chain/hash.hpp"
#include "h2chain/report.hpp"
#include "json.hpp"

using namespace h2chain;
namespace fs = std::filesystem;

namespace {

Scenario fixture(const char* name) { return load_scenario(fs::path(H2CHAIN_DATA_DIR) / name); }

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Minimal RFC 4180 reader: quoted fields, doubled quotes, no embedded newlines.
std::vector<std::map<std::string, std::string>> read_csv(const fs::path& path) {
  std::istringstream in(slurp(path));
  auto split = [](const std::string& line) {
    std::vector<std::string> fields(1);
    bool quoted = false;
    for (std::size_t k = 0; k < line.size(); ++k) {
      const char c = line[k];
      if (quoted && c == '"' && k + 1 < line.size() && line[k + 1] == '"') {
        fields.back() += '"';
        ++k;
      } else if (c == '"') {
        quoted = !quoted;
      } else if (c == ',' && !quoted) {
        fields.emplace_back();
      } else {
        fields.back() += c;
      }
    }
    return fields;
  };
  std::string line;
  std::getline(in, line);
  const std::vector<std::string> header = split(line);
  std::vector<std::map<std::string, std::string>> rows;
  while (std::getline(in, line)) {
    const std::vector<std::string> fields = split(line);
    REQUIRE(fields.size() == header.size());
    std::map<std::string, std::string> row;
    for (std::size_t k = 0; k < header.size(); ++k) row[header[k]] = fields[k];
    rows.push_back(row);
  }
  return rows;
}

double number(const std::string& text) {
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  REQUIRE(*end == '\0');
  return v;
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("h2chain_report_" + name);
  fs::remove_all(dir);
  return dir;
}

PlanningSection planning(const Scenario& s) {
  PlanningSection p;
  p.price = planning_price(s);
  std::vector<StructureRecord> records;
  for (const CoalitionStructure& c : enumerate_structures(s.plant_count())) {
    StructureValue v = solve_planning(c, s);
    REQUIRE(v.status == milp::SolveStatus::kOptimal);
    records.push_back({c, v.block_values});
    p.structures.push_back(std::move(v));
  }
  p.verdicts = stability_report(records);
  const StructureValue& chosen = select_structure(p.structures, p.verdicts);
  p.selected = chosen.structure.label();
  for (const Block& b : chosen.structure.blocks) {
    if (b.members.size() < 2) continue;
    p.imputations.push_back(
        shapley_allocate(b.members, [&](const std::vector<int>& m) { return coalition_value(m, s); }));
  }
  return p;
}

// Every section filled from tiny_case, cheaply.
StudyBundle tiny_bundle() {
  const Scenario s = fixture("tiny_case.json");
  StudyBundle b;
  b.scenario_name = s.name;
  b.scenario_fingerprint = scenario_fingerprint(s);
  b.tariff = s.tariff.electricity_price;
  b.planning = planning(s);
  std::vector<PlanDecision> plans;
  for (const StructureValue& v : b.planning->structures) {
    if (v.structure.label() == b.planning->selected) plans = v.plans;
  }
  PriceSchedule prices;
  prices.prices = {6.25, 7.1, 9.0 / 7.0 + 5.0};
  b.scheduling = evaluate_prices(prices, s, plans);
  b.scheduling->fitness_history = {1.0 / 3.0, 0.5, 0.5};
  b.flat_sweep = fixed_price_sweep(s, plans, {5.0, 8.5, 13.0});
  SensitivitySection sens;
  sens.parameter = SensitivityParameter::kInjectionCap;
  SensitivityOptions options;
  options.ga.population = 6;
  options.ga.generations = 2;
  options.ga.flat_seeds = {5.0};
  sens.points = sensitivity_sweep(s, sens.parameter, {300.0, 600.0}, plans, b.planning->selected, options);
  b.sensitivity = sens;
  return b;
}

const StudyBundle& shared_bundle() {
  static const StudyBundle b = tiny_bundle();
  return b;
}

}  // namespace

TEST_CASE("number formatting") {
  CHECK(money(1234.5) == "1234.50");
  CHECK(money(-0.0) == "0.00");
  CHECK(money(-0.001) == "0.00");
  CHECK(money(-2.5) == "-2.50");
  CHECK(exact(0.1) == "0.1");
  CHECK(exact(-0.0) == "0");
  CHECK(number(exact(1.0 / 3.0)) == 1.0 / 3.0);
}

TEST_CASE("section names") {
  for (Section s : {Section::kPlanning, Section::kScheduling, Section::kFlatSweep, Section::kSensitivity}) {
    CHECK(parse_section(to_string(s)) == s);
  }
  CHECK_THROWS_AS(parse_section("tables"), std::invalid_argument);
}

TEST_CASE("bundle JSON round trip is lossless") {
  const StudyBundle& b = shared_bundle();
  const std::string text = bundle_to_json(b);
  CHECK(text.back() == '\n');
  const StudyBundle back = parse_bundle(text);
  CHECK(bundle_to_json(back) == text);
  REQUIRE(back.scheduling);
  CHECK(back.scheduling->best_prices.prices == b.scheduling->best_prices.prices);
  CHECK(back.scheduling->leader_profit == b.scheduling->leader_profit);
  CHECK(back.scheduling->convention == b.scheduling->convention);
  REQUIRE(back.planning);
  CHECK(back.planning->selected == b.planning->selected);
  CHECK(back.planning->structures.size() == b.planning->structures.size());
  REQUIRE(back.sensitivity);
  CHECK(back.sensitivity->parameter == SensitivityParameter::kInjectionCap);
  CHECK(back.sensitivity->points.size() == 2);

  StudyBundle empty;
  empty.scenario_name = "x";
  const StudyBundle e = parse_bundle(bundle_to_json(empty));
  CHECK_FALSE(e.planning);
  CHECK_FALSE(e.scheduling);
  CHECK_FALSE(e.flat_sweep);
  CHECK_FALSE(e.sensitivity);
}

TEST_CASE("malformed bundles are rejected") {
  CHECK_THROWS_AS(parse_bundle("not json"), std::invalid_argument);
  CHECK_THROWS_AS(parse_bundle("[1,2]"), std::invalid_argument);
  auto j = nlohmann::json::parse(bundle_to_json(shared_bundle()));
  j["scheduling"]["best_prices"] = "cheap";
  CHECK_THROWS_AS(parse_bundle(j.dump()), std::invalid_argument);
}

TEST_CASE("plan file round trip") {
  PlanFile p{"abc", "{1*,2}", {{0, 1, 2, 4}, {1, 0, 0, 3}}};
  const PlanFile back = parse_plan_file(plan_file_to_json(p));
  CHECK(back.scenario_fingerprint == "abc");
  CHECK(back.structure == "{1*,2}");
  REQUIRE(back.plans.size() == 2);
  CHECK(back.plans[0].equipment == 1);
  CHECK(back.plans[0].destination == 2);
  CHECK(back.plans[1].fleet_size == 3);
  CHECK_THROWS_AS(parse_plan_file("{}"), std::invalid_argument);
}

TEST_CASE("exported tables re-parse to the bundle values") {
  const StudyBundle& b = shared_bundle();
  const fs::path dir = scratch("values");
  export_tables(b, dir);
  const EquilibriumReport& r = *b.scheduling;

  const auto eq = read_csv(dir / "equilibrium.csv");
  REQUIRE(eq.size() == r.best_prices.prices.size());
  for (std::size_t t = 0; t < eq.size(); ++t) {
    CHECK(number(eq[t].at("price_exact")) == r.best_prices.prices[t]);
    CHECK(number(eq[t].at("injection")) == r.injection_series[t]);
    for (std::size_t k = 0; k < r.plans.size(); ++k) {
      const std::string plant = "plant" + std::to_string(r.plans[k].plant + 1);
      CHECK(number(eq[t].at(plant + "_shipped")) == r.transaction_series[k][t]);
      CHECK(number(eq[t].at(plant + "_discarded")) == r.discarded_series[k][t]);
    }
  }

  const auto inc = read_csv(dir / "incomes.csv");
  REQUIRE(inc.size() == r.plans.size() + 1);
  CHECK(inc[0].at("party") == "cavern");
  CHECK(number(inc[0].at("profit_exact")) == r.leader_profit);
  for (std::size_t k = 0; k < r.plans.size(); ++k) {
    CHECK(number(inc[k + 1].at("profit_exact")) == r.follower_profits[k]);
  }

  const auto fit = read_csv(dir / "fitness.csv");
  REQUIRE(fit.size() == 3);
  CHECK(number(fit[0].at("best_exact")) == 1.0 / 3.0);

  const auto t5 = read_csv(dir / "table5.csv");
  for (const auto& row : t5) {
    bool found = false;
    for (const StructureValue& v : b.planning->structures) {
      if (v.structure.label() == row.at("structure")) {
        CHECK(number(row.at("total_exact")) == v.total);
        found = true;
      }
    }
    CHECK(found);
  }

  const auto sw = read_csv(dir / "flat_sweep.csv");
  REQUIRE(sw.size() == 3);
  int best = 0;
  for (std::size_t k = 0; k < sw.size(); ++k) {
    CHECK(number(sw[k].at("leader_profit_exact")) == (*b.flat_sweep)[k].leader_profit);
    if (sw[k].at("best") == "yes") best = static_cast<int>(k);
  }
  CHECK(best == best_sweep_point(*b.flat_sweep));

  const auto sens = read_csv(dir / "sensitivity.csv");
  REQUIRE(sens.size() == 2);
  CHECK(sens[0].at("parameter") == "Qtrans");
  CHECK(number(sens[1].at("value")) == 600.0);
  CHECK(number(sens[1].at("leader_profit_exact")) == b.sensitivity->points[1].equilibrium.leader_profit);
}

TEST_CASE("processing table sums the schedule") {
  const StudyBundle& b = shared_bundle();
  const fs::path dir = scratch("processing");
  export_tables(b, dir, {Section::kScheduling});
  const auto rows = read_csv(dir / "processing.csv");
  const EquilibriumReport& r = *b.scheduling;
  REQUIRE(rows.size() == b.tariff.size());
  for (std::size_t k = 0; k < r.plans.size(); ++k) {
    double csv_total = 0.0, schedule_total = 0.0;
    for (const auto& row : rows) csv_total += number(row.at("plant" + std::to_string(r.plans[k].plant + 1) + "_processed"));
    for (double x : r.schedules[k].processed) schedule_total += x;
    CHECK(csv_total == doctest::Approx(schedule_total).epsilon(1e-12));
  }
}

TEST_CASE("missing sections are reported") {
  StudyBundle b;
  b.scenario_name = "empty";
  const fs::path dir = scratch("missing");
  CHECK(export_tables(b, dir).empty());
  CHECK_THROWS_AS(export_tables(b, dir, {Section::kScheduling}), MissingSectionError);
  try {
    export_tables(b, dir, {Section::kFlatSweep});
  } catch (const MissingSectionError& e) {
    CHECK(e.section == Section::kFlatSweep);
    CHECK(std::string(e.what()).find("flat_sweep") != std::string::npos);
  }
}

TEST_CASE("export is byte-identical and the manifest hashes the files") {
  const StudyBundle& b = shared_bundle();
  const fs::path one = scratch("one"), two = scratch("two");
  std::vector<ManifestEntry> a = export_tables(b, one), c = export_tables(b, two);
  REQUIRE(a.size() == c.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    CHECK(a[k].path == c[k].path);
    CHECK(a[k].sha256 == c[k].sha256);
    CHECK(a[k].sha256 == sha256_hex(slurp(one / a[k].path)));
    CHECK(a[k].bytes == fs::file_size(one / a[k].path));
    if (k > 0) CHECK(a[k - 1].path < a[k].path);
  }
  write_manifest(one, a);
  write_manifest(two, c);
  CHECK(slurp(one / "manifest.json") == slurp(two / "manifest.json"));
  const auto m = nlohmann::json::parse(slurp(one / "manifest.json"));
  CHECK(m.at("files").size() == a.size());
  for (const auto& entry : fs::directory_iterator(one)) {
    CHECK(entry.path().filename().string().find(".tmp") == std::string::npos);
  }
}

TEST_CASE("structure table layout on paper_case") {
  const Scenario s = fixture("paper_case.json");
  StudyBundle b;
  b.scenario_name = s.name;
  b.planning = planning(s);
  const fs::path dir = scratch("table5");
  export_tables(b, dir, {Section::kPlanning});
  const auto rows = read_csv(dir / "table5.csv");
  int partitions = 0, hubs = 0;
  std::map<std::string, double> best;
  for (const auto& row : rows) {
    if (row.at("kind") == "partition") {
      ++partitions;
      best[row.at("partition")] = number(row.at("total_exact"));
    } else {
      CHECK(row.at("kind") == "hub");
      ++hubs;
    }
  }
  CHECK(partitions == 5);
  CHECK(hubs == 10);
  // Each partition row carries the best of its hub variants.
  for (const auto& row : rows) {
    if (row.at("kind") == "hub") CHECK(number(row.at("total_exact")) <= best.at(row.at("partition")));
  }
  const auto shapley = read_csv(dir / "shapley.csv");
  for (const Imputation& imp : b.planning->imputations) {
    double total = 0.0;
    for (double v : imp.payoffs) total += v;
    CHECK(total == doctest::Approx(coalition_value(imp.players, s)).epsilon(1e-9));
  }
  CHECK(shapley.size() == [&] {
    std::size_t n = 0;
    for (const Imputation& imp : b.planning->imputations) n += imp.players.size();
    return n;
  }());
}
