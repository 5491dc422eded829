#include "h2chain/scenario.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "h2chain/hash.hpp"
#include "json.hpp"

namespace h2chain {

using nlohmann::json;

namespace {

const json& field(const json& object, const char* key, const std::string& path) {
  if (!object.is_object()) throw ScenarioParseError(path + ": expected an object");
  auto it = object.find(key);
  if (it == object.end()) throw ScenarioParseError(path + "." + key + ": missing field");
  return *it;
}

std::string join(const std::string& path, const char* key) {
  return path.empty() ? std::string(key) : path + "." + key;
}

double read_number(const json& object, const char* key, const std::string& path) {
  const json& value = field(object, key, path);
  if (!value.is_number()) throw ScenarioParseError(join(path, key) + ": expected a number");
  return value.get<double>();
}

int read_int(const json& object, const char* key, const std::string& path) {
  const json& value = field(object, key, path);
  if (!value.is_number_integer()) throw ScenarioParseError(join(path, key) + ": expected an integer");
  return value.get<int>();
}

std::vector<double> read_vector(const json& object, const char* key, const std::string& path) {
  const json& value = field(object, key, path);
  if (!value.is_array()) throw ScenarioParseError(join(path, key) + ": expected an array");
  std::vector<double> out;
  out.reserve(value.size());
  for (const json& entry : value) {
    if (!entry.is_number()) throw ScenarioParseError(join(path, key) + ": expected numbers");
    out.push_back(entry.get<double>());
  }
  return out;
}

TankCapacityRule parse_tank_rule(const std::string& text, const std::string& path) {
  if (text == "equipment") return TankCapacityRule::kEquipmentCapacity;
  if (text == "unbounded") return TankCapacityRule::kUnbounded;
  throw ScenarioParseError(path + ": unknown tank_capacity_rule '" + text + "'");
}

const char* tank_rule_name(TankCapacityRule rule) {
  return rule == TankCapacityRule::kEquipmentCapacity ? "equipment" : "unbounded";
}

void require(bool condition, const std::string& field, const std::string& message) {
  if (!condition) throw ScenarioValidationError(field, message);
}

void require_length(const std::vector<double>& values, int periods, const std::string& field) {
  require(static_cast<int>(values.size()) == periods, field,
          "expected " + std::to_string(periods) + " entries, found " + std::to_string(values.size()));
}

void require_finite_nonnegative(const std::vector<double>& values, const std::string& field) {
  for (double v : values) require(std::isfinite(v) && v >= 0.0, field, "entries must be finite and >= 0");
}

}  // namespace

void validate(const Scenario& s) {
  const int periods = s.horizon.periods;
  require(periods >= 1, "horizon.periods", "must be >= 1");
  require(std::isfinite(s.horizon.period_hours) && s.horizon.period_hours > 0.0, "horizon.period_hours",
          "must be > 0");

  require(!s.plants.empty(), "plants", "at least one plant is required");
  for (std::size_t i = 0; i < s.plants.size(); ++i) {
    const std::string prefix = "plants[" + std::to_string(i) + "]";
    require(s.plants[i].id == static_cast<int>(i) + 1, prefix + ".id", "ids must be 1..I in order");
    require_length(s.plants[i].generation, periods, prefix + ".generation");
    require_finite_nonnegative(s.plants[i].generation, prefix + ".generation");
  }

  const EquipmentCatalog& c = s.catalog;
  require(c.compressor_types >= 0, "catalog.compressor_types", "must be >= 0");
  require(c.liquefier_types >= 0, "catalog.liquefier_types", "must be >= 0");
  require(c.type_count() >= 1, "catalog", "at least one equipment type is required");
  require(static_cast<int>(c.capacity_per_hour.size()) == c.type_count(), "catalog.capacity_per_hour",
          "length must equal compressor_types + liquefier_types");
  require(static_cast<int>(c.invest_daily.size()) == c.type_count(), "catalog.invest_daily",
          "length must equal compressor_types + liquefier_types");
  for (double v : c.capacity_per_hour)
    require(std::isfinite(v) && v > 0.0, "catalog.capacity_per_hour", "entries must be > 0");
  for (double v : c.invest_daily) require(std::isfinite(v) && v > 0.0, "catalog.invest_daily", "entries must be > 0");
  require(std::isfinite(c.compress_kwh_per_kg) && c.compress_kwh_per_kg > 0.0, "catalog.compress_kwh_per_kg",
          "must be > 0");
  require(std::isfinite(c.liquefy_kwh_per_kg) && c.liquefy_kwh_per_kg > c.compress_kwh_per_kg,
          "catalog.liquefy_kwh_per_kg", "must exceed compress_kwh_per_kg");

  const TransportParams& t = s.transport;
  require(std::isfinite(t.tube_capacity) && t.tube_capacity > 0.0, "transport.tube_capacity", "must be > 0");
  require(std::isfinite(t.tanker_capacity) && t.tanker_capacity > t.tube_capacity, "transport.tanker_capacity",
          "must exceed tube_capacity");
  require(std::isfinite(t.tube_invest_daily) && t.tube_invest_daily >= 0.0, "transport.tube_invest_daily",
          "must be >= 0");
  require(std::isfinite(t.tanker_invest_daily) && t.tanker_invest_daily >= 0.0, "transport.tanker_invest_daily",
          "must be >= 0");
  require(std::isfinite(t.op_cost_per_period) && t.op_cost_per_period >= 0.0, "transport.op_cost_per_period",
          "must be >= 0");
  require(t.loading_retention > 0.0 && t.loading_retention <= 1.0, "transport.loading_retention",
          "retention fraction must lie in (0, 1]");
  require(t.transit_retention > 0.0 && t.transit_retention <= 1.0, "transport.transit_retention",
          "retention fraction must lie in (0, 1]");
  const int plants = s.plant_count();
  require(static_cast<int>(t.travel_periods.size()) == plants, "transport.travel_periods",
          "expected one row per plant");
  for (int i = 0; i < plants; ++i) {
    const std::string row = "transport.travel_periods[" + std::to_string(i) + "]";
    require(static_cast<int>(t.travel_periods[i].size()) == plants + 1, row, "expected I+1 columns");
    for (int j = 0; j <= plants; ++j) require(t.travel_periods[i][j] >= 0, row, "entries must be >= 0");
    require(t.travel_periods[i][i] == 0, row, "diagonal entry must be 0");
  }

  const CavernParams& cav = s.cavern;
  require(std::isfinite(cav.retail_price) && cav.retail_price >= 0.0, "cavern.retail_price", "must be >= 0");
  require_length(cav.price_floor, periods, "cavern.price_floor");
  require_length(cav.price_ceiling, periods, "cavern.price_ceiling");
  for (int k = 0; k < periods; ++k) {
    require(std::isfinite(cav.price_floor[k]) && cav.price_floor[k] >= 0.0, "cavern.price_floor", "must be >= 0");
    require(cav.price_floor[k] <= cav.price_ceiling[k], "cavern.price_ceiling", "must be >= price_floor");
    require(cav.price_ceiling[k] <= cav.retail_price, "cavern.price_ceiling", "must be <= retail_price");
  }
  require(std::isfinite(cav.max_injection) && cav.max_injection > 0.0, "cavern.max_injection", "must be > 0");

  require_length(s.tariff.electricity_price, periods, "tariff.electricity_price");
  require_finite_nonnegative(s.tariff.electricity_price, "tariff.electricity_price");
}

Scenario parse_scenario(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ScenarioParseError(std::string("malformed scenario document: ") + e.what());
  }
  if (!doc.is_object()) throw ScenarioParseError("scenario document must be an object");
  const int version = read_int(doc, "schema_version", "");
  if (version != kScenarioSchemaVersion) {
    throw ScenarioParseError("schema_version: unsupported version " + std::to_string(version));
  }

  Scenario s;
  if (auto it = doc.find("name"); it != doc.end() && it->is_string()) s.name = it->get<std::string>();

  const json& horizon = field(doc, "horizon", "");
  s.horizon.periods = read_int(horizon, "periods", "horizon");
  s.horizon.period_hours = read_number(horizon, "period_hours", "horizon");

  const json& plants = field(doc, "plants", "");
  if (!plants.is_array()) throw ScenarioParseError("plants: expected an array");
  for (std::size_t i = 0; i < plants.size(); ++i) {
    const std::string path = "plants[" + std::to_string(i) + "]";
    PlantParams p;
    p.id = read_int(plants[i], "id", path);
    p.generation = read_vector(plants[i], "generation", path);
    if (auto it = plants[i].find("tank_capacity_rule"); it != plants[i].end()) {
      if (!it->is_string()) throw ScenarioParseError(path + ".tank_capacity_rule: expected a string");
      p.tank_capacity_rule = parse_tank_rule(it->get<std::string>(), path + ".tank_capacity_rule");
    }
    s.plants.push_back(std::move(p));
  }

  const json& catalog = field(doc, "catalog", "");
  s.catalog.capacity_per_hour = read_vector(catalog, "capacity_per_hour", "catalog");
  s.catalog.invest_daily = read_vector(catalog, "invest_daily", "catalog");
  s.catalog.compressor_types = read_int(catalog, "compressor_types", "catalog");
  s.catalog.liquefier_types = read_int(catalog, "liquefier_types", "catalog");
  s.catalog.compress_kwh_per_kg = read_number(catalog, "compress_kwh_per_kg", "catalog");
  s.catalog.liquefy_kwh_per_kg = read_number(catalog, "liquefy_kwh_per_kg", "catalog");

  const json& transport = field(doc, "transport", "");
  s.transport.tube_capacity = read_number(transport, "tube_capacity", "transport");
  s.transport.tanker_capacity = read_number(transport, "tanker_capacity", "transport");
  s.transport.tube_invest_daily = read_number(transport, "tube_invest_daily", "transport");
  s.transport.tanker_invest_daily = read_number(transport, "tanker_invest_daily", "transport");
  s.transport.op_cost_per_period = read_number(transport, "op_cost_per_period", "transport");
  s.transport.loading_retention = read_number(transport, "loading_retention", "transport");
  s.transport.transit_retention = read_number(transport, "transit_retention", "transport");
  const json& travel = field(transport, "travel_periods", "transport");
  if (!travel.is_array()) throw ScenarioParseError("transport.travel_periods: expected an array of rows");
  for (const json& row : travel) {
    if (!row.is_array()) throw ScenarioParseError("transport.travel_periods: expected an array of rows");
    std::vector<int> out;
    for (const json& entry : row) {
      if (!entry.is_number_integer()) throw ScenarioParseError("transport.travel_periods: expected integers");
      out.push_back(entry.get<int>());
    }
    s.transport.travel_periods.push_back(std::move(out));
  }

  const json& cavern = field(doc, "cavern", "");
  s.cavern.retail_price = read_number(cavern, "retail_price", "cavern");
  s.cavern.price_floor = read_vector(cavern, "price_floor", "cavern");
  s.cavern.price_ceiling = read_vector(cavern, "price_ceiling", "cavern");
  s.cavern.max_injection = read_number(cavern, "max_injection", "cavern");

  const json& tariff = field(doc, "tariff", "");
  s.tariff.electricity_price = read_vector(tariff, "electricity_price", "tariff");

  const json& seed = field(doc, "rng_seed", "");
  if (!seed.is_number_unsigned() && !(seed.is_number_integer() && seed.get<std::int64_t>() >= 0)) {
    throw ScenarioParseError("rng_seed: expected a non-negative integer");
  }
  s.rng_seed = seed.get<std::uint64_t>();

  validate(s);
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ScenarioParseError("cannot open scenario file '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_scenario(buffer.str());
}

std::string save_scenario(const Scenario& s) {
  json doc;
  doc["schema_version"] = kScenarioSchemaVersion;
  doc["name"] = s.name;
  doc["horizon"] = {{"periods", s.horizon.periods}, {"period_hours", s.horizon.period_hours}};
  json plants = json::array();
  for (const PlantParams& p : s.plants) {
    plants.push_back({{"id", p.id},
                      {"generation", p.generation},
                      {"tank_capacity_rule", tank_rule_name(p.tank_capacity_rule)}});
  }
  doc["plants"] = std::move(plants);
  doc["catalog"] = {{"capacity_per_hour", s.catalog.capacity_per_hour},
                    {"invest_daily", s.catalog.invest_daily},
                    {"compressor_types", s.catalog.compressor_types},
                    {"liquefier_types", s.catalog.liquefier_types},
                    {"compress_kwh_per_kg", s.catalog.compress_kwh_per_kg},
                    {"liquefy_kwh_per_kg", s.catalog.liquefy_kwh_per_kg}};
  doc["transport"] = {{"tube_capacity", s.transport.tube_capacity},
                      {"tanker_capacity", s.transport.tanker_capacity},
                      {"tube_invest_daily", s.transport.tube_invest_daily},
                      {"tanker_invest_daily", s.transport.tanker_invest_daily},
                      {"op_cost_per_period", s.transport.op_cost_per_period},
                      {"travel_periods", s.transport.travel_periods},
                      {"loading_retention", s.transport.loading_retention},
                      {"transit_retention", s.transport.transit_retention}};
  doc["cavern"] = {{"retail_price", s.cavern.retail_price},
                   {"price_floor", s.cavern.price_floor},
                   {"price_ceiling", s.cavern.price_ceiling},
                   {"max_injection", s.cavern.max_injection}};
  doc["tariff"] = {{"electricity_price", s.tariff.electricity_price}};
  doc["rng_seed"] = s.rng_seed;
  return doc.dump(2) + "\n";
}

std::string scenario_fingerprint(const Scenario& s) { return sha256_hex(save_scenario(s)); }

std::vector<double> generate_generation_profile(double mean, double variance, int periods, std::uint64_t seed) {
  if (!(mean > 0.0) || !(variance >= 0.0) || periods < 0) {
    throw std::invalid_argument("generate_generation_profile: need mean > 0, variance >= 0, periods >= 0");
  }
  std::vector<double> out(static_cast<std::size_t>(periods), mean);
  if (variance == 0.0) return out;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(mean, std::sqrt(variance));
  for (double& v : out) v = std::max(0.0, normal(rng));
  return out;
}

std::filesystem::path resolve_scenario_path(const std::filesystem::path& path) {
  if (std::filesystem::exists(path)) return path;
  std::filesystem::path bundled = std::filesystem::path(H2CHAIN_DATA_DIR) / path.filename();
  if (std::filesystem::exists(bundled)) return bundled;
  return path;
}

}  // namespace h2chain
