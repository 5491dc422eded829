// Market instance data model: plants, processing catalog, road transport,
// salt cavern, electricity tariff and the planning horizon.
//
// Units are fixed across the library: money in $, mass in kg, energy in kWh,
// time in periods. Plant indices are 0-based in code and 1-based in files and
// reports.

#ifndef H2CHAIN_SCENARIO_HPP
#define H2CHAIN_SCENARIO_HPP

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace h2chain {

inline constexpr int kScenarioSchemaVersion = 1;

struct Horizon {
  int periods = 0;
  double period_hours = 1.0;
};

// How the low-pressure tank of a plant is bounded.
enum class TankCapacityRule {
  kEquipmentCapacity,  // bound equals the chosen equipment's per-period capacity
  kUnbounded,
};

struct PlantParams {
  int id = 0;  // 1-based, equal to position + 1
  std::vector<double> generation;  // by-product mass per period (kg)
  TankCapacityRule tank_capacity_rule = TankCapacityRule::kEquipmentCapacity;
};

// Types [0, compressor_types) are compressors, the rest liquefiers.
struct EquipmentCatalog {
  std::vector<double> capacity_per_hour;  // kg/h
  std::vector<double> invest_daily;       // $/day, already discounted
  int compressor_types = 0;
  int liquefier_types = 0;
  double compress_kwh_per_kg = 0.0;
  double liquefy_kwh_per_kg = 0.0;

  int type_count() const { return compressor_types + liquefier_types; }
  bool is_compressor(int type) const { return type < compressor_types; }
};

struct TransportParams {
  double tube_capacity = 0.0;        // kg per tube-trailer trip
  double tanker_capacity = 0.0;      // kg per tanker-truck trip
  double tube_invest_daily = 0.0;    // $/day per trailer
  double tanker_invest_daily = 0.0;  // $/day per truck
  double op_cost_per_period = 0.0;   // $ per vehicle per travelled period
  // travel_periods[i][j]: periods from plant i to plant j; column I is the cavern.
  std::vector<std::vector<int>> travel_periods;
  double loading_retention = 1.0;  // fraction of buffered LH2 kept per loading period
  double transit_retention = 1.0;  // fraction of LH2 kept per transit period
};

struct CavernParams {
  double retail_price = 0.0;  // $/kg paid by end users
  std::vector<double> price_floor;
  std::vector<double> price_ceiling;
  double max_injection = 0.0;  // kg per period
};

struct Tariff {
  std::vector<double> electricity_price;  // $/kWh
};

struct Scenario {
  std::string name;
  Horizon horizon;
  std::vector<PlantParams> plants;
  EquipmentCatalog catalog;
  TransportParams transport;
  CavernParams cavern;
  Tariff tariff;
  std::uint64_t rng_seed = 0;

  int plant_count() const { return static_cast<int>(plants.size()); }
  int periods() const { return horizon.periods; }
  int cavern_index() const { return plant_count(); }
  int travel(int from, int to) const { return transport.travel_periods[from][to]; }
};

class ScenarioParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Names the offending field with a dotted path, e.g. "tariff.electricity_price".
class ScenarioValidationError : public std::runtime_error {
 public:
  ScenarioValidationError(std::string field, const std::string& message)
      : std::runtime_error(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

// Throws ScenarioValidationError on the first violated invariant.
void validate(const Scenario& scenario);

Scenario load_scenario(const std::filesystem::path& path);
Scenario parse_scenario(const std::string& text);

// Canonical text form: sorted keys, two-space indent, trailing newline.
std::string save_scenario(const Scenario& scenario);

// SHA-256 of the canonical text, lowercase hex.
std::string scenario_fingerprint(const Scenario& scenario);

// Draws from Normal(mean, variance) clipped at zero; deterministic in seed.
std::vector<double> generate_generation_profile(double mean, double variance, int periods,
                                                std::uint64_t seed);

// Resolves a bundled fixture name ("paper_case.json") when `path` does not exist.
std::filesystem::path resolve_scenario_path(const std::filesystem::path& path);

}  // namespace h2chain

#endif  // H2CHAIN_SCENARIO_HPP
