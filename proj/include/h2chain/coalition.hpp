// Planning-stage cooperative game among the plants.
//
// A coalition structure partitions the plants into blocks; each multi-plant
// block routes its members' CH2/LH2 through one hub, which alone ships to the
// cavern. Structure values come from an exact enumeration of equipment choices
// with one joint MILP per choice (fleet sizes and schedules inside the MILP).

#ifndef H2CHAIN_COALITION_HPP
#define H2CHAIN_COALITION_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "h2chain/milp.hpp"
#include "h2chain/plant.hpp"
#include "h2chain/prices.hpp"
#include "h2chain/scenario.hpp"

namespace h2chain {

inline constexpr int kMaxStructurePlants = 6;

struct Block {
  std::vector<int> members;  // 0-based plant indices, ascending
  int hub = -1;              // member acting as transit hub; -1 for singletons

  friend bool operator==(const Block&, const Block&) = default;
};

struct CoalitionStructure {
  std::vector<Block> blocks;  // ordered by smallest member

  // "{1,2*},{3}" with 1-based plants and the hub starred.
  std::string label() const;
  // "{1,2},{3}" without hub marks.
  std::string partition_label() const;
  // Destination of every plant (hub index or the cavern).
  std::vector<int> destinations(int cavern_index) const;

  friend bool operator==(const CoalitionStructure&, const CoalitionStructure&) = default;
};

class StructureLimitError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// All set partitions of {0..plants-1} in restricted-growth order.
std::vector<std::vector<std::vector<int>>> enumerate_partitions(int plants);

// Every partition expanded over all hub choices of its multi-plant blocks.
// Throws StructureLimitError above kMaxStructurePlants.
std::vector<CoalitionStructure> enumerate_structures(int plants);

// Parses the label() form; throws std::invalid_argument on malformed text.
CoalitionStructure parse_structure(const std::string& label, int plants);

struct PlanningOptions {
  // Price used while planning; the per-period midpoint of the band when empty.
  std::optional<PriceSchedule> price;
  milp::MilpOptions milp;
  bool enforce_injection_cap = true;
};

// Per-period midpoint of [price_floor, price_ceiling].
PriceSchedule planning_price(const Scenario& scenario);

struct StructureValue {
  CoalitionStructure structure;
  std::vector<double> block_values;  // parallel to structure.blocks
  double total = 0.0;
  std::vector<PlanDecision> plans;  // best plan, one per plant in the structure, by plant index
  std::vector<Schedule> schedules;  // parallel to plans
  std::vector<CostBreakdown> costs;  // parallel to plans
  milp::SolveStatus status = milp::SolveStatus::kOptimal;  // worst status among the solves
  int models_solved = 0;
  std::string diagnostic;
};

// Exact planning optimum for one structure: every combination of equipment
// types is solved as one joint MILP (shared injection cap) and the best kept.
// Plants missing from the structure are absent from the market.
StructureValue solve_planning(const CoalitionStructure& structure, const Scenario& scenario,
                              const PlanningOptions& options = {});

// Best value of `members` acting as one block with nobody else in the market,
// maximized over hub choices. Empty set is worth 0.
double coalition_value(const std::vector<int>& members, const Scenario& scenario, const PlanningOptions& options = {});

struct Imputation {
  std::vector<int> players;     // 0-based plant indices
  std::vector<double> payoffs;  // parallel to players ($/day)
  std::string method = "shapley";
};

// Classical Shapley value over the subsets of `players`; value_of receives a
// sorted subset and must return 0 for the empty set.
Imputation shapley_allocate(const std::vector<int>& players,
                            const std::function<double(const std::vector<int>&)>& value_of);

struct StructureRecord {
  CoalitionStructure structure;
  std::vector<double> block_values;
  double total() const;
};

struct StabilityVerdict {
  std::string label;
  double total = 0.0;
  // Blocks worth less than the sum of their members' standalone values.
  std::vector<int> rationality_violations;
  // Index (into the input) of a structure with a strictly larger total whose
  // new blocks are each worth at least their members' standalone values.
  int dominated_by = -1;
  bool stable() const { return rationality_violations.empty() && dominated_by < 0; }
};

// Standalone values are read from the all-singleton structure, which must be
// present. Throws std::invalid_argument otherwise.
std::vector<StabilityVerdict> stability_report(const std::vector<StructureRecord>& records);

// Best hub per partition, in enumerate_partitions order.
std::vector<StructureValue> best_per_partition(const std::vector<StructureValue>& values, int plants);

struct BestResponseResult {
  std::vector<PlanDecision> plans;  // by plant index
  std::vector<Schedule> schedules;
  std::vector<double> block_values;
  double total = 0.0;
  int rounds = 0;
  bool converged = false;
};

// Round-robin best response over the blocks of `structure`: each block
// re-chooses equipment, fleet and schedule holding the others fixed and
// sharing what remains of the injection cap. Starts from random equipment
// (drawn from `seed`) with schedules built block by block.
BestResponseResult best_response_dynamics(const CoalitionStructure& structure, const Scenario& scenario,
                                          std::uint64_t seed, const PlanningOptions& options = {},
                                          int max_rounds = 50);

}  // namespace h2chain

#endif  // H2CHAIN_COALITION_HPP
