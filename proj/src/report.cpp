#include "h2chain/report.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include <fmt/format.h>

#include "h2chain/hash.hpp"
#include "json.hpp"

namespace h2chain {

using nlohmann::json;

// JSON conversions, found by argument-dependent lookup.

void to_json(json& j, const PriceSchedule& p) { j = p.prices; }
void from_json(const json& j, PriceSchedule& p) { j.get_to(p.prices); }

void to_json(json& j, const PlanDecision& p) {
  j = json{{"plant", p.plant}, {"equipment", p.equipment}, {"destination", p.destination}, {"fleet_size", p.fleet_size}};
}
void from_json(const json& j, PlanDecision& p) {
  j.at("plant").get_to(p.plant);
  j.at("equipment").get_to(p.equipment);
  j.at("destination").get_to(p.destination);
  j.at("fleet_size").get_to(p.fleet_size);
}

void to_json(json& j, const Schedule& s) {
  j = json{{"plant", s.plant},
           {"processed", s.processed},
           {"shipped", s.shipped},
           {"vehicle_buffer", s.vehicle_buffer},
           {"tank_buffer", s.tank_buffer},
           {"departures", s.departures},
           {"discarded", s.discarded},
           {"inbound", s.inbound},
           {"fleet_size", s.fleet_size}};
}
void from_json(const json& j, Schedule& s) {
  j.at("plant").get_to(s.plant);
  j.at("processed").get_to(s.processed);
  j.at("shipped").get_to(s.shipped);
  j.at("vehicle_buffer").get_to(s.vehicle_buffer);
  j.at("tank_buffer").get_to(s.tank_buffer);
  j.at("departures").get_to(s.departures);
  j.at("discarded").get_to(s.discarded);
  j.at("inbound").get_to(s.inbound);
  j.at("fleet_size").get_to(s.fleet_size);
}

void to_json(json& j, const CostBreakdown& c) {
  j = json{{"revenue", c.revenue},
           {"processing_cost", c.processing_cost},
           {"transport_cost", c.transport_cost},
           {"equipment_invest", c.equipment_invest},
           {"fleet_invest", c.fleet_invest},
           {"profit", c.profit}};
}
void from_json(const json& j, CostBreakdown& c) {
  j.at("revenue").get_to(c.revenue);
  j.at("processing_cost").get_to(c.processing_cost);
  j.at("transport_cost").get_to(c.transport_cost);
  j.at("equipment_invest").get_to(c.equipment_invest);
  j.at("fleet_invest").get_to(c.fleet_invest);
  j.at("profit").get_to(c.profit);
}

void to_json(json& j, const Block& b) { j = json{{"members", b.members}, {"hub", b.hub}}; }
void from_json(const json& j, Block& b) {
  j.at("members").get_to(b.members);
  j.at("hub").get_to(b.hub);
}

namespace milp {

void to_json(json& j, const SolveStatus& s) { j = to_string(s); }
void from_json(const json& j, SolveStatus& s) {
  const std::string text = j.get<std::string>();
  for (SolveStatus candidate :
       {SolveStatus::kOptimal, SolveStatus::kInfeasible, SolveStatus::kUnbounded, SolveStatus::kGapLimit}) {
    if (text == to_string(candidate)) {
      s = candidate;
      return;
    }
  }
  throw std::invalid_argument("unknown solve status '" + text + "'");
}

}  // namespace milp

void to_json(json& j, const StructureValue& v) {
  j = json{{"structure", v.structure.label()},
           {"blocks", v.structure.blocks},
           {"block_values", v.block_values},
           {"total", v.total},
           {"plans", v.plans},
           {"schedules", v.schedules},
           {"costs", v.costs},
           {"status", v.status},
           {"models_solved", v.models_solved},
           {"diagnostic", v.diagnostic}};
}
void from_json(const json& j, StructureValue& v) {
  j.at("blocks").get_to(v.structure.blocks);
  j.at("block_values").get_to(v.block_values);
  j.at("total").get_to(v.total);
  j.at("plans").get_to(v.plans);
  j.at("schedules").get_to(v.schedules);
  j.at("costs").get_to(v.costs);
  j.at("status").get_to(v.status);
  j.at("models_solved").get_to(v.models_solved);
  j.at("diagnostic").get_to(v.diagnostic);
}

void to_json(json& j, const StabilityVerdict& v) {
  j = json{{"label", v.label},
           {"total", v.total},
           {"rationality_violations", v.rationality_violations},
           {"dominated_by", v.dominated_by}};
}
void from_json(const json& j, StabilityVerdict& v) {
  j.at("label").get_to(v.label);
  j.at("total").get_to(v.total);
  j.at("rationality_violations").get_to(v.rationality_violations);
  j.at("dominated_by").get_to(v.dominated_by);
}

void to_json(json& j, const Imputation& i) {
  j = json{{"players", i.players}, {"payoffs", i.payoffs}, {"method", i.method}};
}
void from_json(const json& j, Imputation& i) {
  j.at("players").get_to(i.players);
  j.at("payoffs").get_to(i.payoffs);
  j.at("method").get_to(i.method);
}

void to_json(json& j, const FollowerResponse& r) {
  j = json{{"schedules", r.schedules}, {"costs", r.costs}, {"objective", r.objective},
           {"status", r.status},       {"gap", r.gap},     {"nodes", r.nodes}};
}
void from_json(const json& j, FollowerResponse& r) {
  j.at("schedules").get_to(r.schedules);
  j.at("costs").get_to(r.costs);
  j.at("objective").get_to(r.objective);
  j.at("status").get_to(r.status);
  j.at("gap").get_to(r.gap);
  j.at("nodes").get_to(r.nodes);
}

void to_json(json& j, const EquilibriumReport& r) {
  // Schedules and costs live once, inside the response.
  j = json{{"best_prices", r.best_prices},
           {"leader_profit", r.leader_profit},
           {"plans", r.plans},
           {"follower_profits", r.follower_profits},
           {"transaction_series", r.transaction_series},
           {"discarded_series", r.discarded_series},
           {"injection_series", r.injection_series},
           {"fitness_history", r.fitness_history},
           {"response", r.response},
           {"convention", to_string(r.convention)},
           {"evaluations", r.evaluations}};
}
void from_json(const json& j, EquilibriumReport& r) {
  j.at("best_prices").get_to(r.best_prices);
  j.at("leader_profit").get_to(r.leader_profit);
  j.at("plans").get_to(r.plans);
  j.at("follower_profits").get_to(r.follower_profits);
  j.at("transaction_series").get_to(r.transaction_series);
  j.at("discarded_series").get_to(r.discarded_series);
  j.at("injection_series").get_to(r.injection_series);
  j.at("fitness_history").get_to(r.fitness_history);
  j.at("response").get_to(r.response);
  r.convention = parse_arrival_convention(j.at("convention").get<std::string>());
  j.at("evaluations").get_to(r.evaluations);
  r.schedules = r.response.schedules;
  r.costs = r.response.costs;
}

void to_json(json& j, const SweepPoint& p) {
  j = json{{"price", p.price}, {"leader_profit", p.leader_profit}, {"total_volume", p.total_volume}};
}
void from_json(const json& j, SweepPoint& p) {
  j.at("price").get_to(p.price);
  j.at("leader_profit").get_to(p.leader_profit);
  j.at("total_volume").get_to(p.total_volume);
}

void to_json(json& j, const SensitivityPoint& p) {
  j = json{{"value", p.value},
           {"structure", p.structure},
           {"stable_structures", p.stable_structures},
           {"structures", p.structures},
           {"block_values", p.block_values},
           {"cooperation_gain", p.cooperation_gain},
           {"scheduled", p.scheduled}};
  if (p.scheduled) j["equilibrium"] = p.equilibrium;
}
void from_json(const json& j, SensitivityPoint& p) {
  j.at("value").get_to(p.value);
  j.at("structure").get_to(p.structure);
  j.at("stable_structures").get_to(p.stable_structures);
  j.at("structures").get_to(p.structures);
  j.at("block_values").get_to(p.block_values);
  j.at("cooperation_gain").get_to(p.cooperation_gain);
  j.at("scheduled").get_to(p.scheduled);
  if (p.scheduled) j.at("equilibrium").get_to(p.equilibrium);
}

namespace {

std::string csv_field(const std::string& text) {
  if (text.find_first_of(",\"\n") == std::string::npos) return text;
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

class Csv {
 public:
  explicit Csv(const std::vector<std::string>& header) { row(header); }
  void row(const std::vector<std::string>& fields) {
    for (std::size_t k = 0; k < fields.size(); ++k) {
      if (k) text_ += ',';
      text_ += csv_field(fields[k]);
    }
    text_ += '\n';
  }
  const std::string& text() const { return text_; }

 private:
  std::string text_;
};

std::string joined(const std::vector<std::string>& parts) {
  std::string out;
  for (const std::string& p : parts) out += (out.empty() ? "" : " ") + p;
  return out;
}

std::string plant_name(int plant) { return fmt::format("plant{}", plant + 1); }

std::string verdict_text(const StabilityVerdict& v, const std::vector<StabilityVerdict>& all) {
  std::vector<std::string> parts;
  if (!v.rationality_violations.empty()) parts.push_back("collective rationality violated");
  if (v.dominated_by >= 0) parts.push_back("dominated by " + all[v.dominated_by].label);
  return parts.empty() ? "stable" : fmt::format("{}", fmt::join(parts, "; "));
}

std::string partition_table(const PlanningSection& p) {
  if (p.verdicts.size() != p.structures.size()) throw std::invalid_argument("planning verdicts do not match structures");
  Csv csv({"kind", "partition", "structure", "total", "total_exact", "block_values", "block_values_exact", "stable",
           "verdict"});
  auto emit = [&](const char* kind, std::size_t k) {
    const StructureValue& v = p.structures[k];
    std::vector<std::string> rounded, full;
    for (double b : v.block_values) {
      rounded.push_back(money(b));
      full.push_back(exact(b));
    }
    csv.row({kind, v.structure.partition_label(), v.structure.label(), money(v.total), exact(v.total), joined(rounded),
             joined(full), p.verdicts[k].stable() ? "yes" : "no", verdict_text(p.verdicts[k], p.verdicts)});
  };
  // One row per partition (its best hub choice, first on ties), then every hub variant.
  std::vector<std::string> seen;
  for (std::size_t k = 0; k < p.structures.size(); ++k) {
    const std::string part = p.structures[k].structure.partition_label();
    if (std::find(seen.begin(), seen.end(), part) != seen.end()) continue;
    seen.push_back(part);
    std::size_t best = k;
    for (std::size_t j = k + 1; j < p.structures.size(); ++j) {
      if (p.structures[j].structure.partition_label() == part && p.structures[j].total > p.structures[best].total) {
        best = j;
      }
    }
    emit("partition", best);
  }
  for (std::size_t k = 0; k < p.structures.size(); ++k) emit("hub", k);
  return csv.text();
}

std::string shapley_table(const PlanningSection& p) {
  Csv csv({"structure", "plant", "payoff", "payoff_exact"});
  for (const Imputation& imp : p.imputations) {
    for (std::size_t k = 0; k < imp.players.size(); ++k) {
      csv.row({p.selected, plant_name(imp.players[k]), money(imp.payoffs[k]), exact(imp.payoffs[k])});
    }
  }
  return csv.text();
}

std::string equilibrium_table(const EquilibriumReport& r) {
  std::vector<std::string> header{"period", "price", "price_exact", "injection"};
  for (const PlanDecision& p : r.plans) {
    header.push_back(plant_name(p.plant) + "_shipped");
    header.push_back(plant_name(p.plant) + "_discarded");
  }
  Csv csv(header);
  for (std::size_t t = 0; t < r.best_prices.prices.size(); ++t) {
    std::vector<std::string> row{std::to_string(t + 1), money(r.best_prices.prices[t]), exact(r.best_prices.prices[t]),
                                 exact(r.injection_series[t])};
    for (std::size_t k = 0; k < r.plans.size(); ++k) {
      row.push_back(exact(r.transaction_series[k][t]));
      row.push_back(exact(r.discarded_series[k][t]));
    }
    csv.row(row);
  }
  return csv.text();
}

std::string processing_table(const EquilibriumReport& r, const std::vector<double>& tariff) {
  std::vector<std::string> header{"period", "tariff"};
  for (const PlanDecision& p : r.plans) header.push_back(plant_name(p.plant) + "_processed");
  Csv csv(header);
  for (std::size_t t = 0; t < r.best_prices.prices.size(); ++t) {
    std::vector<std::string> row{std::to_string(t + 1), t < tariff.size() ? exact(tariff[t]) : ""};
    for (const Schedule& s : r.schedules) row.push_back(exact(s.processed[t]));
    csv.row(row);
  }
  return csv.text();
}

std::vector<std::vector<std::string>> income_rows(const EquilibriumReport& r) {
  std::vector<std::vector<std::string>> rows{{"cavern", money(r.leader_profit), exact(r.leader_profit)}};
  for (std::size_t k = 0; k < r.plans.size(); ++k) {
    rows.push_back({plant_name(r.plans[k].plant), money(r.follower_profits[k]), exact(r.follower_profits[k])});
  }
  return rows;
}

std::string income_table(const EquilibriumReport& r) {
  Csv csv({"party", "profit", "profit_exact"});
  for (const auto& row : income_rows(r)) csv.row(row);
  return csv.text();
}

std::string fitness_table(const EquilibriumReport& r) {
  Csv csv({"generation", "best", "best_exact"});
  for (std::size_t g = 0; g < r.fitness_history.size(); ++g) {
    csv.row({std::to_string(g), money(r.fitness_history[g]), exact(r.fitness_history[g])});
  }
  return csv.text();
}

std::string flat_sweep_table(const std::vector<SweepPoint>& sweep) {
  Csv csv({"price", "leader_profit", "leader_profit_exact", "volume", "best"});
  const int best = best_sweep_point(sweep);
  for (std::size_t k = 0; k < sweep.size(); ++k) {
    csv.row({exact(sweep[k].price), money(sweep[k].leader_profit), exact(sweep[k].leader_profit),
             exact(sweep[k].total_volume), static_cast<int>(k) == best ? "yes" : "no"});
  }
  return csv.text();
}

std::string sensitivity_table(const SensitivitySection& s) {
  Csv csv({"parameter", "value", "structure", "stable_structures", "cooperation_gain", "cooperation_gain_exact",
           "leader_profit", "leader_profit_exact"});
  for (const SensitivityPoint& p : s.points) {
    csv.row({to_string(s.parameter), exact(p.value), p.structure, joined(p.stable_structures), money(p.cooperation_gain),
             exact(p.cooperation_gain), p.scheduled ? money(p.equilibrium.leader_profit) : "",
             p.scheduled ? exact(p.equilibrium.leader_profit) : ""});
  }
  return csv.text();
}

std::string sensitivity_income_table(const SensitivitySection& s) {
  Csv csv({"parameter", "value", "party", "profit", "profit_exact"});
  for (const SensitivityPoint& p : s.points) {
    if (!p.scheduled) continue;
    for (auto row : income_rows(p.equilibrium)) {
      row.insert(row.begin(), {to_string(s.parameter), exact(p.value)});
      csv.row(row);
    }
  }
  return csv.text();
}

json bundle_json(const StudyBundle& b) {
  json j{{"scenario_name", b.scenario_name}, {"scenario_fingerprint", b.scenario_fingerprint}, {"tariff", b.tariff}};
  if (b.planning) {
    j["planning"] = json{{"price", b.planning->price},
                         {"structures", b.planning->structures},
                         {"verdicts", b.planning->verdicts},
                         {"selected", b.planning->selected},
                         {"imputations", b.planning->imputations}};
  }
  if (b.scheduling) j["scheduling"] = *b.scheduling;
  if (b.flat_sweep) j["flat_sweep"] = *b.flat_sweep;
  if (b.sensitivity) {
    j["sensitivity"] = json{{"parameter", to_string(b.sensitivity->parameter)}, {"points", b.sensitivity->points}};
  }
  return j;
}

}  // namespace

std::string money(double value) {
  std::string text = fmt::format("{:.2f}", value);
  if (text == "-0.00") text = "0.00";
  return text;
}

std::string exact(double value) { return value == 0.0 ? "0" : fmt::format("{}", value); }

const char* to_string(Section section) {
  switch (section) {
    case Section::kPlanning:
      return "planning";
    case Section::kScheduling:
      return "scheduling";
    case Section::kFlatSweep:
      return "flat_sweep";
    case Section::kSensitivity:
      return "sensitivity";
  }
  return "?";
}

Section parse_section(const std::string& text) {
  for (Section s : {Section::kPlanning, Section::kScheduling, Section::kFlatSweep, Section::kSensitivity}) {
    if (text == to_string(s)) return s;
  }
  throw std::invalid_argument("unknown report section '" + text + "'");
}

std::string bundle_to_json(const StudyBundle& bundle) { return bundle_json(bundle).dump(2) + "\n"; }

StudyBundle parse_bundle(const std::string& text) {
  try {
    const json j = json::parse(text);
    StudyBundle b;
    j.at("scenario_name").get_to(b.scenario_name);
    j.at("scenario_fingerprint").get_to(b.scenario_fingerprint);
    j.at("tariff").get_to(b.tariff);
    if (j.contains("planning")) {
      const json& p = j.at("planning");
      PlanningSection section;
      p.at("price").get_to(section.price);
      p.at("structures").get_to(section.structures);
      p.at("verdicts").get_to(section.verdicts);
      p.at("selected").get_to(section.selected);
      p.at("imputations").get_to(section.imputations);
      b.planning = std::move(section);
    }
    if (j.contains("scheduling")) b.scheduling = j.at("scheduling").get<EquilibriumReport>();
    if (j.contains("flat_sweep")) b.flat_sweep = j.at("flat_sweep").get<std::vector<SweepPoint>>();
    if (j.contains("sensitivity")) {
      SensitivitySection section;
      section.parameter = parse_sensitivity_parameter(j.at("sensitivity").at("parameter").get<std::string>());
      j.at("sensitivity").at("points").get_to(section.points);
      b.sensitivity = std::move(section);
    }
    return b;
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("malformed study bundle: ") + e.what());
  }
}

ManifestEntry write_file_atomic(const std::filesystem::path& dir, const std::string& name, const std::string& contents) {
  std::filesystem::create_directories(dir);
  const std::filesystem::path target = dir / name;
  const std::filesystem::path temp = dir / (name + ".tmp");
  {
    std::ofstream out(temp, std::ios::binary | std::ios::trunc);
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw std::runtime_error("cannot write " + temp.string());
  }
  std::filesystem::rename(temp, target);
  return {name, sha256_hex(contents), contents.size()};
}

std::vector<ManifestEntry> export_tables(const StudyBundle& bundle, const std::filesystem::path& dir,
                                         const std::vector<Section>& sections) {
  std::vector<Section> wanted = sections;
  if (wanted.empty()) {
    if (bundle.planning) wanted.push_back(Section::kPlanning);
    if (bundle.scheduling) wanted.push_back(Section::kScheduling);
    if (bundle.flat_sweep) wanted.push_back(Section::kFlatSweep);
    if (bundle.sensitivity) wanted.push_back(Section::kSensitivity);
  }
  for (Section s : wanted) {
    const bool present = (s == Section::kPlanning && bundle.planning) || (s == Section::kScheduling && bundle.scheduling) ||
                         (s == Section::kFlatSweep && bundle.flat_sweep) ||
                         (s == Section::kSensitivity && bundle.sensitivity);
    if (!present) throw MissingSectionError(s);
  }
  // Render everything before touching the directory.
  std::map<std::string, std::string> files;
  for (Section s : wanted) {
    switch (s) {
      case Section::kPlanning:
        files["table5.csv"] = partition_table(*bundle.planning);
        files["shapley.csv"] = shapley_table(*bundle.planning);
        break;
      case Section::kScheduling: {
        const EquilibriumReport& r = *bundle.scheduling;
        files["equilibrium.csv"] = equilibrium_table(r);
        files["processing.csv"] = processing_table(r, bundle.tariff);
        files["incomes.csv"] = income_table(r);
        files["fitness.csv"] = fitness_table(r);
        break;
      }
      case Section::kFlatSweep:
        files["flat_sweep.csv"] = flat_sweep_table(*bundle.flat_sweep);
        break;
      case Section::kSensitivity:
        files["sensitivity.csv"] = sensitivity_table(*bundle.sensitivity);
        files["sensitivity_incomes.csv"] = sensitivity_income_table(*bundle.sensitivity);
        break;
    }
  }
  std::vector<ManifestEntry> entries;
  for (const auto& [name, text] : files) entries.push_back(write_file_atomic(dir, name, text));
  return entries;
}

ManifestEntry write_manifest(const std::filesystem::path& dir, std::vector<ManifestEntry> entries) {
  std::sort(entries.begin(), entries.end(), [](const ManifestEntry& a, const ManifestEntry& b) { return a.path < b.path; });
  json files = json::array();
  for (const ManifestEntry& e : entries) files.push_back(json{{"path", e.path}, {"sha256", e.sha256}, {"bytes", e.bytes}});
  return write_file_atomic(dir, "manifest.json", json{{"files", files}}.dump(2) + "\n");
}

std::string plan_file_to_json(const PlanFile& plan) {
  return json{{"scenario_fingerprint", plan.scenario_fingerprint}, {"structure", plan.structure}, {"plans", plan.plans}}
             .dump(2) +
         "\n";
}

PlanFile parse_plan_file(const std::string& text) {
  try {
    const json j = json::parse(text);
    PlanFile plan;
    j.at("scenario_fingerprint").get_to(plan.scenario_fingerprint);
    j.at("structure").get_to(plan.structure);
    j.at("plans").get_to(plan.plans);
    return plan;
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("malformed plan file: ") + e.what());
  }
}

}  // namespace h2chain
