// Writes the bundled scenario files into a directory (default: data/).
//
// Plant generation is drawn with generate_generation_profile using seed
// rng_seed + plant index (0-based), so the files can be rebuilt exactly.

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "h2chain/scenario.hpp"

using namespace h2chain;

namespace {

Scenario paper_case() {
  Scenario s;
  s.name = "paper_case";
  s.rng_seed = 2024;
  s.horizon = {12, 1.0};
  const double means[] = {1000.0, 1500.0, 3000.0};
  for (int i = 0; i < 3; ++i) {
    s.plants.push_back({i + 1, generate_generation_profile(means[i], 100.0, 12, s.rng_seed + i),
                        TankCapacityRule::kEquipmentCapacity});
  }
  s.catalog.capacity_per_hour = {1200.0, 2000.0, 4000.0, 8000.0};
  s.catalog.invest_daily = {774.29, 126612.0, 18977.17, 34757.99};
  s.catalog.compressor_types = 2;
  s.catalog.liquefier_types = 2;
  s.catalog.compress_kwh_per_kg = 1.0;
  s.catalog.liquefy_kwh_per_kg = 8.18;
  s.transport.tube_capacity = 200.0;
  s.transport.tanker_capacity = 4000.0;
  s.transport.tube_invest_daily = 82.20;
  s.transport.tanker_invest_daily = 219.18;
  s.transport.op_cost_per_period = 25.0;
  s.transport.travel_periods = {{0, 0, 0, 4}, {0, 0, 0, 4}, {0, 0, 0, 4}};
  s.transport.loading_retention = 0.99;
  s.transport.transit_retention = 0.995;
  s.cavern.retail_price = 15.0;
  s.cavern.price_floor.assign(12, 5.0);
  s.cavern.price_ceiling.assign(12, 13.0);
  s.cavern.max_injection = 9000.0;
  s.tariff.electricity_price = {0.30, 0.30, 0.30, 0.50, 0.70, 0.90, 0.90, 0.70, 0.50, 0.70, 0.90, 0.50};
  return s;
}

Scenario tiny_case() {
  Scenario s;
  s.name = "tiny_case";
  s.rng_seed = 7;
  s.horizon = {3, 1.0};
  s.plants.push_back({1, {200.0, 180.0, 220.0}, TankCapacityRule::kEquipmentCapacity});
  s.plants.push_back({2, {300.0, 320.0, 280.0}, TankCapacityRule::kEquipmentCapacity});
  s.catalog.capacity_per_hour = {300.0, 800.0};
  s.catalog.invest_daily = {50.0, 150.0};
  s.catalog.compressor_types = 1;
  s.catalog.liquefier_types = 1;
  s.catalog.compress_kwh_per_kg = 1.0;
  s.catalog.liquefy_kwh_per_kg = 8.18;
  s.transport.tube_capacity = 100.0;
  s.transport.tanker_capacity = 400.0;
  s.transport.tube_invest_daily = 10.0;
  s.transport.tanker_invest_daily = 30.0;
  s.transport.op_cost_per_period = 25.0;
  s.transport.travel_periods = {{0, 0, 1}, {0, 0, 1}};
  s.transport.loading_retention = 0.99;
  s.transport.transit_retention = 0.995;
  s.cavern.retail_price = 15.0;
  s.cavern.price_floor.assign(3, 5.0);
  s.cavern.price_ceiling.assign(3, 13.0);
  s.cavern.max_injection = 600.0;
  s.tariff.electricity_price = {0.08, 0.15, 0.05};
  return s;
}

bool write(const std::filesystem::path& path, const Scenario& s) {
  validate(s);
  std::ofstream out(path, std::ios::binary);
  out << save_scenario(s);
  return static_cast<bool>(out);
}

}  // namespace

int main(int argc, char** argv) {
  const std::filesystem::path dir = argc > 1 ? argv[1] : "data";
  std::filesystem::create_directories(dir);
  if (!write(dir / "paper_case.json", paper_case()) || !write(dir / "tiny_case.json", tiny_case())) {
    std::fprintf(stderr, "make_fixtures: cannot write into %s\n", dir.string().c_str());
    return 1;
  }
  return 0;
}
