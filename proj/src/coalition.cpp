#include "h2chain/coalition.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <random>
#include <sstream>

#include <fmt/format.h>

namespace h2chain {

namespace {

bool better(double candidate, double incumbent) {
  return candidate > incumbent + 1e-9 * std::max(1.0, std::abs(incumbent));
}

int status_rank(milp::SolveStatus s) {
  switch (s) {
    case milp::SolveStatus::kOptimal:
      return 0;
    case milp::SolveStatus::kGapLimit:
      return 1;
    default:
      return 2;
  }
}

std::vector<int> plants_of(const CoalitionStructure& structure) {
  std::vector<int> plants;
  for (const Block& b : structure.blocks) plants.insert(plants.end(), b.members.begin(), b.members.end());
  std::sort(plants.begin(), plants.end());
  return plants;
}

struct JointSolve {
  bool ok = false;
  double total = 0.0;
  milp::SolveStatus status = milp::SolveStatus::kOptimal;
  std::vector<Schedule> schedules;
  std::vector<CostBreakdown> costs;
  std::vector<PlanDecision> plans;  // fleet sizes filled in
};

ModelOptions planning_model_options(const PlanningOptions& options, const std::vector<double>& reserved) {
  ModelOptions model_options;
  model_options.fleet = FleetMode::kOptimize;
  model_options.enforce_injection_cap = options.enforce_injection_cap;
  model_options.reserved_injection = reserved;
  return model_options;
}

JointSolve solve_joint(std::vector<PlanDecision> plans, const Scenario& s, const PriceSchedule& price,
                       const PlanningOptions& options, const std::vector<double>& reserved) {
  const ModelOptions model_options = planning_model_options(options, reserved);
  const ScheduleModel model = build_schedule_model(plans, s, price, model_options);
  const milp::SolveResult r = milp::solve_milp(model.lp, options.milp);
  JointSolve out;
  out.status = r.status;
  if (!r.has_solution()) return out;
  out.ok = true;
  out.schedules = extract_schedules(model, r.assignment, s, model_options);
  for (std::size_t k = 0; k < plans.size(); ++k) {
    plans[k].fleet_size = out.schedules[k].fleet_size;
    out.costs.push_back(cost_breakdown(out.schedules[k], plans[k], s, price));
    out.total += out.costs.back().profit;
  }
  out.plans = std::move(plans);
  return out;
}

// LP relaxation value: an upper bound on every schedule of this equipment choice.
double relaxation_bound(const std::vector<PlanDecision>& plans, const Scenario& s, const PriceSchedule& price,
                        const PlanningOptions& options, const std::vector<double>& reserved) {
  milp::LinearProgram lp = build_schedule_model(plans, s, price, planning_model_options(options, reserved)).lp;
  std::fill(lp.integrality.begin(), lp.integrality.end(), milp::VarType::kContinuous);
  const milp::SolveResult r = milp::solve_lp(lp);
  return r.status == milp::SolveStatus::kOptimal ? r.objective_value : milp::kInfinity;
}

// Best equipment assignment for `plans` (destinations fixed) over every
// combination of catalog types. Combinations are solved in order of their
// relaxation bound and skipped once the bound cannot beat the incumbent; ties
// go to the earliest combination in odometer order (first plant fastest).
JointSolve best_equipment(std::vector<PlanDecision> plans, const Scenario& s, const PriceSchedule& price,
                          const PlanningOptions& options, const std::vector<double>& reserved, int& solved) {
  const int types = s.catalog.type_count();
  struct Candidate {
    std::vector<PlanDecision> plans;
    double bound;
    int index;
  };
  std::vector<Candidate> candidates;
  for (PlanDecision& p : plans) p.equipment = 0;
  for (int index = 0;; ++index) {
    candidates.push_back({plans, relaxation_bound(plans, s, price, options, reserved), index});
    std::size_t digit = 0;
    while (digit < plans.size() && ++plans[digit].equipment == types) plans[digit++].equipment = 0;
    if (digit == plans.size()) break;
  }
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const Candidate& a, const Candidate& b) { return a.bound > b.bound; });

  JointSolve best;
  int best_index = -1;
  milp::SolveStatus worst = milp::SolveStatus::kOptimal;
  for (const Candidate& c : candidates) {
    if (best.ok && better(best.total, c.bound)) break;
    JointSolve candidate = solve_joint(c.plans, s, price, options, reserved);
    ++solved;
    if (status_rank(candidate.status) > status_rank(worst)) worst = candidate.status;
    if (!candidate.ok) continue;
    const bool wins = !best.ok || better(candidate.total, best.total) ||
                      (!better(best.total, candidate.total) && c.index < best_index);
    if (wins) {
      best = std::move(candidate);
      best_index = c.index;
    }
  }
  best.status = worst;
  return best;
}

std::vector<PlanDecision> template_plans(const CoalitionStructure& structure, const Scenario& s) {
  const std::vector<int> dest = structure.destinations(s.cavern_index());
  std::vector<PlanDecision> plans;
  for (int p : plants_of(structure)) plans.push_back({p, 0, dest[p], 0});
  return plans;
}

void check_structure(const CoalitionStructure& structure, const Scenario& s) {
  std::vector<int> seen(s.plant_count(), 0);
  for (const Block& b : structure.blocks) {
    if (b.members.empty()) throw std::invalid_argument("coalition structure has an empty block");
    for (int m : b.members) {
      if (m < 0 || m >= s.plant_count() || seen[m]++) {
        throw std::invalid_argument("coalition structure repeats or misnames a plant");
      }
    }
    const bool has_hub = std::find(b.members.begin(), b.members.end(), b.hub) != b.members.end();
    if (b.members.size() > 1 && !has_hub) throw std::invalid_argument("multi-plant block needs a hub among its members");
    if (b.members.size() == 1 && b.hub >= 0 && b.hub != b.members[0]) {
      throw std::invalid_argument("singleton block names a foreign hub");
    }
  }
}

std::string block_label(const Block& b, bool mark_hub) {
  std::string out = "{";
  for (std::size_t k = 0; k < b.members.size(); ++k) {
    if (k) out += ",";
    out += std::to_string(b.members[k] + 1);
    if (mark_hub && b.members.size() > 1 && b.members[k] == b.hub) out += "*";
  }
  return out + "}";
}

}  // namespace

std::string CoalitionStructure::label() const {
  std::string out;
  for (std::size_t k = 0; k < blocks.size(); ++k) out += (k ? "," : "") + block_label(blocks[k], true);
  return out;
}

std::string CoalitionStructure::partition_label() const {
  std::string out;
  for (std::size_t k = 0; k < blocks.size(); ++k) out += (k ? "," : "") + block_label(blocks[k], false);
  return out;
}

std::vector<int> CoalitionStructure::destinations(int cavern_index) const {
  std::vector<int> dest(cavern_index, cavern_index);
  for (const Block& b : blocks) {
    if (b.members.size() < 2) continue;
    for (int m : b.members) {
      if (m != b.hub) dest[m] = b.hub;
    }
  }
  return dest;
}

std::vector<std::vector<std::vector<int>>> enumerate_partitions(int plants) {
  if (plants < 1 || plants > kMaxStructurePlants) {
    throw StructureLimitError(fmt::format("structure enumeration supports 1..{} plants, got {}", kMaxStructurePlants, plants));
  }
  // Restricted-growth strings, then more blocks first (no cooperation leads).
  std::vector<std::vector<std::vector<int>>> out;
  std::vector<int> code(plants, 0);
  for (;;) {
    const int blocks = *std::max_element(code.begin(), code.end()) + 1;
    std::vector<std::vector<int>> partition(blocks);
    for (int i = 0; i < plants; ++i) partition[code[i]].push_back(i);
    out.push_back(std::move(partition));
    int i = plants - 1;
    for (; i > 0; --i) {
      const int prefix_max = *std::max_element(code.begin(), code.begin() + i);
      if (code[i] <= prefix_max) {
        ++code[i];
        std::fill(code.begin() + i + 1, code.end(), 0);
        break;
      }
    }
    if (i == 0) break;
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.size() > b.size(); });
  return out;
}

std::vector<CoalitionStructure> enumerate_structures(int plants) {
  std::vector<CoalitionStructure> out;
  for (const auto& partition : enumerate_partitions(plants)) {
    std::vector<std::size_t> choice(partition.size(), 0);
    for (;;) {
      CoalitionStructure s;
      for (std::size_t b = 0; b < partition.size(); ++b) {
        const auto& members = partition[b];
        s.blocks.push_back({members, members.size() > 1 ? members[choice[b]] : -1});
      }
      out.push_back(std::move(s));
      std::size_t b = 0;
      while (b < partition.size() && ++choice[b] >= partition[b].size()) choice[b++] = 0;
      if (b == partition.size()) break;
    }
  }
  return out;
}

CoalitionStructure parse_structure(const std::string& label, int plants) {
  CoalitionStructure s;
  std::size_t pos = 0;
  auto fail = [&]() -> CoalitionStructure { throw std::invalid_argument("malformed coalition structure '" + label + "'"); };
  while (pos < label.size()) {
    if (label[pos] == ',') ++pos;
    if (pos >= label.size() || label[pos] != '{') return fail();
    const std::size_t close = label.find('}', pos);
    if (close == std::string::npos) return fail();
    Block b;
    std::stringstream body(label.substr(pos + 1, close - pos - 1));
    std::string item;
    while (std::getline(body, item, ',')) {
      const bool hub = !item.empty() && item.back() == '*';
      if (hub) item.pop_back();
      if (item.empty() || item.find_first_not_of("0123456789") != std::string::npos) return fail();
      const int plant = std::stoi(item) - 1;
      if (plant < 0 || plant >= plants) return fail();
      b.members.push_back(plant);
      if (hub) b.hub = plant;
    }
    if (b.members.empty()) return fail();
    std::sort(b.members.begin(), b.members.end());
    if (b.members.size() == 1) b.hub = -1;
    if (b.members.size() > 1 && b.hub < 0) return fail();
    s.blocks.push_back(std::move(b));
    pos = close + 1;
  }
  if (s.blocks.empty()) return fail();
  std::sort(s.blocks.begin(), s.blocks.end(),
            [](const Block& a, const Block& b) { return a.members.front() < b.members.front(); });
  std::vector<int> seen(plants, 0);
  for (const Block& b : s.blocks) {
    for (int m : b.members) {
      if (seen[m]++) return fail();
    }
  }
  return s;
}

PriceSchedule planning_price(const Scenario& s) {
  PriceSchedule p;
  for (int t = 0; t < s.periods(); ++t) p.prices.push_back(0.5 * (s.cavern.price_floor[t] + s.cavern.price_ceiling[t]));
  return p;
}

StructureValue solve_planning(const CoalitionStructure& structure, const Scenario& s, const PlanningOptions& options) {
  check_structure(structure, s);
  const PriceSchedule price = options.price ? *options.price : planning_price(s);
  StructureValue out;
  out.structure = structure;
  JointSolve best = best_equipment(template_plans(structure, s), s, price, options, {}, out.models_solved);
  out.status = best.status;
  if (!best.ok) {
    // Every block can ship nothing, so only a solver failure gets here.
    out.diagnostic = fmt::format("no feasible plan found ({})", milp::to_string(best.status));
    out.block_values.assign(structure.blocks.size(), 0.0);
    return out;
  }
  if (best.status != milp::SolveStatus::kOptimal) {
    out.diagnostic = fmt::format("some plan models stopped with status {}", milp::to_string(best.status));
  }
  out.plans = best.plans;
  out.schedules = best.schedules;
  out.costs = best.costs;
  for (const Block& b : structure.blocks) {
    double value = 0.0;
    for (std::size_t k = 0; k < out.plans.size(); ++k) {
      if (std::find(b.members.begin(), b.members.end(), out.plans[k].plant) != b.members.end()) {
        value += out.costs[k].profit;
      }
    }
    out.block_values.push_back(value);
    out.total += value;
  }
  return out;
}

double coalition_value(const std::vector<int>& members, const Scenario& s, const PlanningOptions& options) {
  if (members.empty()) return 0.0;
  std::vector<int> sorted = members;
  std::sort(sorted.begin(), sorted.end());
  if (sorted.size() == 1) return solve_planning({{{sorted, -1}}}, s, options).total;
  double best = -milp::kInfinity;
  for (int hub : sorted) best = std::max(best, solve_planning({{{sorted, hub}}}, s, options).total);
  return best;
}

Imputation shapley_allocate(const std::vector<int>& players,
                            const std::function<double(const std::vector<int>&)>& value_of) {
  const int n = static_cast<int>(players.size());
  if (n > 20) throw std::invalid_argument("shapley_allocate: at most 20 players");
  std::vector<int> order(players);
  std::sort(order.begin(), order.end());
  const unsigned full = (1u << n) - 1u;
  std::vector<double> v(full + 1u, 0.0);
  for (unsigned mask = 1; mask <= full; ++mask) {
    std::vector<int> subset;
    for (int k = 0; k < n; ++k) {
      if (mask & (1u << k)) subset.push_back(order[k]);
    }
    v[mask] = value_of(subset);
  }
  // weight[s] = s! (n - s - 1)! / n!
  std::vector<double> weight(n, 0.0);
  for (int size = 0; size < n; ++size) {
    double w = 1.0 / n;
    for (int k = 1; k <= size; ++k) w *= static_cast<double>(k) / (n - k);
    weight[size] = w;
  }
  Imputation out;
  out.players = order;
  out.payoffs.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    const unsigned bit = 1u << i;
    for (unsigned mask = 0; mask <= full; ++mask) {
      if (mask & bit) continue;
      out.payoffs[i] += weight[std::popcount(mask)] * (v[mask | bit] - v[mask]);
    }
  }
  return out;
}

double StructureRecord::total() const {
  double t = 0.0;
  for (double v : block_values) t += v;
  return t;
}

std::vector<StabilityVerdict> stability_report(const std::vector<StructureRecord>& records) {
  std::map<int, double> standalone;
  for (const StructureRecord& r : records) {
    const bool singletons = std::all_of(r.structure.blocks.begin(), r.structure.blocks.end(),
                                        [](const Block& b) { return b.members.size() == 1; });
    if (!singletons) continue;
    for (std::size_t b = 0; b < r.structure.blocks.size(); ++b) standalone[r.structure.blocks[b].members[0]] = r.block_values[b];
    break;
  }
  if (standalone.empty()) throw std::invalid_argument("stability_report: the all-singleton structure is required");
  auto standalone_sum = [&](const Block& b) {
    double sum = 0.0;
    for (int m : b.members) {
      const auto it = standalone.find(m);
      if (it == standalone.end()) throw std::invalid_argument("stability_report: plant missing from the singleton structure");
      sum += it->second;
    }
    return sum;
  };
  auto at_least = [](double a, double b) { return a >= b - 1e-9 * std::max(1.0, std::abs(b)); };

  std::vector<StabilityVerdict> out;
  for (const StructureRecord& a : records) {
    StabilityVerdict v;
    v.label = a.structure.label();
    v.total = a.total();
    for (std::size_t b = 0; b < a.structure.blocks.size(); ++b) {
      const Block& block = a.structure.blocks[b];
      if (block.members.size() > 1 && !at_least(a.block_values[b], standalone_sum(block))) {
        v.rationality_violations.push_back(static_cast<int>(b));
      }
    }
    double best_alternative = v.total;
    for (std::size_t k = 0; k < records.size(); ++k) {
      const StructureRecord& b = records[k];
      if (!better(b.total(), v.total) || !better(b.total(), best_alternative)) continue;
      bool every_new_block_gains = true;
      for (std::size_t j = 0; j < b.structure.blocks.size(); ++j) {
        const Block& block = b.structure.blocks[j];
        const bool unchanged =
            std::find(a.structure.blocks.begin(), a.structure.blocks.end(), block) != a.structure.blocks.end();
        if (!unchanged && !at_least(b.block_values[j], standalone_sum(block))) every_new_block_gains = false;
      }
      if (every_new_block_gains) {
        v.dominated_by = static_cast<int>(k);
        best_alternative = b.total();
      }
    }
    out.push_back(std::move(v));
  }
  return out;
}

std::vector<StructureValue> best_per_partition(const std::vector<StructureValue>& values, int plants) {
  std::vector<StructureValue> out;
  for (const auto& partition : enumerate_partitions(plants)) {
    CoalitionStructure bare;
    for (const auto& members : partition) bare.blocks.push_back({members, -1});
    const std::string key = bare.partition_label();
    const StructureValue* best = nullptr;
    for (const StructureValue& v : values) {
      if (v.structure.partition_label() == key && (!best || better(v.total, best->total))) best = &v;
    }
    if (best) out.push_back(*best);
  }
  return out;
}

BestResponseResult best_response_dynamics(const CoalitionStructure& structure, const Scenario& s, std::uint64_t seed,
                                          const PlanningOptions& options, int max_rounds) {
  check_structure(structure, s);
  const PriceSchedule price = options.price ? *options.price : planning_price(s);
  const std::vector<int> dest = structure.destinations(s.cavern_index());
  const int T = s.periods();
  const std::size_t blocks = structure.blocks.size();

  std::vector<std::vector<PlanDecision>> plans(blocks);
  std::vector<std::vector<Schedule>> schedules(blocks);
  std::vector<double> values(blocks, 0.0);
  auto arrivals_except = [&](std::size_t skip) {
    std::vector<double> reserved(T, 0.0);
    for (std::size_t b = 0; b < blocks; ++b) {
      if (b == skip || plans[b].empty()) continue;
      const std::vector<double> a = cavern_arrivals(schedules[b], plans[b], s);
      for (int t = 0; t < T; ++t) reserved[t] += a[t];
    }
    return reserved;
  };
  auto adopt = [&](std::size_t b, JointSolve&& solved) {
    plans[b] = std::move(solved.plans);
    schedules[b] = std::move(solved.schedules);
    values[b] = solved.total;
  };

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> type(0, s.catalog.type_count() - 1);
  for (std::size_t b = 0; b < blocks; ++b) {
    std::vector<PlanDecision> start;
    for (int m : structure.blocks[b].members) start.push_back({m, type(rng), dest[m], 0});
    JointSolve solved = solve_joint(start, s, price, options, arrivals_except(b));
    if (!solved.ok) throw std::runtime_error("best_response_dynamics: initial block model has no solution");
    adopt(b, std::move(solved));
  }

  BestResponseResult out;
  for (out.rounds = 1; out.rounds <= max_rounds; ++out.rounds) {
    bool moved = false;
    for (std::size_t b = 0; b < blocks; ++b) {
      int solved_count = 0;
      JointSolve reply = best_equipment(plans[b], s, price, options, arrivals_except(b), solved_count);
      const double margin = std::max(options.milp.gap_tol, 1e-9) * std::max(1.0, std::abs(values[b]));
      if (reply.ok && reply.total > values[b] + margin) {
        adopt(b, std::move(reply));
        moved = true;
      }
    }
    if (!moved) {
      out.converged = true;
      break;
    }
  }
  out.rounds = std::min(out.rounds, max_rounds);
  std::vector<std::pair<int, std::size_t>> order;  // (plant, block) to emit plans by plant index
  for (std::size_t b = 0; b < blocks; ++b) {
    for (std::size_t k = 0; k < plans[b].size(); ++k) {
      out.plans.push_back(plans[b][k]);
      out.schedules.push_back(schedules[b][k]);
    }
    out.block_values.push_back(values[b]);
    out.total += values[b];
  }
  std::vector<std::size_t> idx(out.plans.size());
  for (std::size_t k = 0; k < idx.size(); ++k) idx[k] = k;
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return out.plans[a].plant < out.plans[b].plant; });
  std::vector<PlanDecision> sorted_plans;
  std::vector<Schedule> sorted_schedules;
  for (std::size_t k : idx) {
    sorted_plans.push_back(out.plans[k]);
    sorted_schedules.push_back(out.schedules[k]);
  }
  out.plans = std::move(sorted_plans);
  out.schedules = std::move(sorted_schedules);
  return out;
}

}  // namespace h2chain
