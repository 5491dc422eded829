#include <chrono>
#include <cmath>
#include <memory>
#include <optional>
#include <queue>
#include <stdexcept>

#include "h2chain/milp.hpp"
#include "simplex.hpp"

namespace h2chain::milp {

namespace {

using detail::Basis;
using detail::LpOutcome;
using detail::SimplexEngine;

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

struct Node {
  std::vector<double> int_lower;  // bounds of the integer variables only
  std::vector<double> int_upper;
  double bound = kInfinity;  // parent's relaxation value
  int depth = 0;
  bool floor_branch = true;
  std::int64_t seq = 0;
  std::int64_t parent = -1;
  std::shared_ptr<const Basis> basis;
  int branch_pos = -1;  // position in the integer list of the variable branched on
  double branch_delta = 1.0;  // distance the branch moved it
};

// Best bound first; ties dive deeper, floor branch first, then FIFO. The
// floor child of every branching is plunged into before the queue is consulted.
struct NodeOrder {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound < b.bound;
    if (a.depth != b.depth) return a.depth < b.depth;
    if (a.floor_branch != b.floor_branch) return !a.floor_branch;
    return a.seq > b.seq;
  }
};

constexpr std::int64_t kDiveInterval = 100;  // branchings between dives

}  // namespace

SolveResult solve_lp(const LinearProgram& lp) {
  if (lp.has_integers()) throw std::invalid_argument("solve_lp: all variables must be continuous");
  const auto start = std::chrono::steady_clock::now();
  SimplexEngine engine(lp);
  SolveResult result;
  const LpOutcome outcome = engine.solve();
  result.stats.nodes = 1;
  result.stats.simplex_iterations = engine.iterations();
  switch (outcome) {
    case LpOutcome::kOptimal:
      result.status = SolveStatus::kOptimal;
      result.assignment = engine.primal();
      result.objective_value = engine.objective();
      result.bound = result.objective_value;
      break;
    case LpOutcome::kInfeasible:
      result.status = SolveStatus::kInfeasible;
      result.bound = -kInfinity;
      break;
    case LpOutcome::kUnbounded:
      result.status = SolveStatus::kUnbounded;
      result.objective_value = kInfinity;
      result.bound = kInfinity;
      break;
  }
  result.stats.wall_seconds = seconds_since(start);
  return result;
}

SolveResult solve_milp(const LinearProgram& lp, const MilpOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  lp.check();
  const int n = lp.num_variables();
  std::vector<int> int_vars;
  for (int j = 0; j < n; ++j) {
    if (lp.is_integer(j)) int_vars.push_back(j);
  }

  SolveResult result;
  std::vector<double> lower = lp.lower;
  std::vector<double> upper = lp.upper;
  for (int j : int_vars) {
    lower[j] = std::ceil(lower[j] - kIntegralityTol);
    upper[j] = std::floor(upper[j] + kIntegralityTol);
    if (lower[j] > upper[j]) {
      result.status = SolveStatus::kInfeasible;
      result.bound = -kInfinity;
      return result;
    }
  }

  // Root relaxation, solved cold.
  LinearProgram root_lp = lp;
  root_lp.lower = lower;
  root_lp.upper = upper;
  SimplexEngine engine(root_lp);
  LpOutcome outcome = engine.solve();
  result.stats.nodes = 1;

  if (outcome == LpOutcome::kInfeasible) {
    result.status = SolveStatus::kInfeasible;
    result.bound = -kInfinity;
    result.stats.simplex_iterations = engine.iterations();
    result.stats.wall_seconds = seconds_since(start);
    return result;
  }
  if (outcome == LpOutcome::kUnbounded) {
    result.status = SolveStatus::kUnbounded;
    result.objective_value = kInfinity;
    result.bound = kInfinity;
    result.stats.simplex_iterations = engine.iterations();
    result.stats.wall_seconds = seconds_since(start);
    return result;
  }

  bool has_incumbent = false;
  double incumbent = -kInfinity;
  std::vector<double> incumbent_x;
  double closed_bound = -kInfinity;  // largest bound among nodes pruned within tolerance
  auto tolerance = [&](double value) { return options.gap_tol * std::max(1.0, std::abs(value)); };

  std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
  std::int64_t next_seq = 1;
  std::int64_t last_solved = 0;  // seq of the node whose basis the engine holds
  std::optional<Node> plunge;     // floor child processed next, ahead of the queue

  auto global_bound = [&]() {
    double b = std::max(closed_bound, has_incumbent ? incumbent : -kInfinity);
    if (!open.empty()) b = std::max(b, open.top().bound);
    if (plunge) b = std::max(b, plunge->bound);
    return b;
  };

  // Pseudocosts: average objective loss per unit of bound change, per
  // variable and direction (0 down, 1 up).
  const std::size_t num_int = int_vars.size();
  std::vector<double> pc_sum[2] = {std::vector<double>(num_int, 0.0), std::vector<double>(num_int, 0.0)};
  std::vector<int> pc_count[2] = {std::vector<int>(num_int, 0), std::vector<int>(num_int, 0)};
  double pc_total[2] = {0.0, 0.0};
  int pc_total_count[2] = {0, 0};
  auto pseudocost = [&](int dir, std::size_t k) {
    if (pc_count[dir][k] > 0) return pc_sum[dir][k] / pc_count[dir][k];
    return pc_total_count[dir] > 0 ? pc_total[dir] / pc_total_count[dir] : 1.0;
  };

  auto offer = [&](std::vector<double> x) {
    for (int j : int_vars) x[j] = std::round(x[j]);
    const double exact = lp.evaluate(x);
    if (!has_incumbent || exact > incumbent) {
      has_incumbent = true;
      incumbent = exact;
      incumbent_x = std::move(x);
    }
  };

  // Fractional diving from the relaxation the engine holds: repeatedly rounds
  // the least fractional variable, backtracking once per step.
  auto dive = [&](const std::vector<double>& node_lower, const std::vector<double>& node_upper) {
    std::vector<double> dl = node_lower, du = node_upper;
    for (std::size_t step = 0; step <= 2 * num_int; ++step) {
      if (has_incumbent && engine.objective() <= incumbent + tolerance(incumbent)) return;
      const std::vector<double> x = engine.primal();
      int pick = -1;
      double pick_dist = 1.0;
      for (int j : int_vars) {
        const double frac = x[j] - std::floor(x[j]);
        const double dist = std::min(frac, 1.0 - frac);
        if (dist > kIntegralityTol && dist < pick_dist) {
          pick_dist = dist;
          pick = j;
        }
      }
      if (pick < 0) {
        offer(x);
        return;
      }
      const double saved_lower = dl[pick], saved_upper = du[pick];
      const bool down = x[pick] - std::floor(x[pick]) < 0.5;
      for (int attempt = 0; attempt < 2; ++attempt) {
        dl[pick] = saved_lower;
        du[pick] = saved_upper;
        if (down == (attempt == 0)) {
          du[pick] = std::floor(x[pick]);
        } else {
          dl[pick] = std::ceil(x[pick]);
        }
        ++result.stats.nodes;
        if (engine.resolve(dl, du) == LpOutcome::kOptimal) break;
        if (attempt == 1) return;
      }
    }
  };

  // Examines the relaxation just solved for node `seq`.
  auto process = [&](const Node& node, const std::vector<double>& node_lower, const std::vector<double>& node_upper) {
    const double value = engine.objective();
    if (node.branch_pos >= 0) {
      const int dir = node.floor_branch ? 0 : 1;
      const double loss = std::max(0.0, node.bound - value) / node.branch_delta;
      pc_sum[dir][node.branch_pos] += loss;
      ++pc_count[dir][node.branch_pos];
      pc_total[dir] += loss;
      ++pc_total_count[dir];
    }
    if (has_incumbent && value <= incumbent + tolerance(incumbent)) {
      closed_bound = std::max(closed_bound, value);
      return;
    }
    const std::vector<double> x = engine.primal();
    int branch_pos = -1;
    double best_score = -1.0;
    for (std::size_t k = 0; k < num_int; ++k) {
      const double v = x[int_vars[k]];
      const double frac = v - std::floor(v);
      if (std::min(frac, 1.0 - frac) <= kIntegralityTol) continue;
      const double score =
          std::max(frac * pseudocost(0, k), 1e-6) * std::max((1.0 - frac) * pseudocost(1, k), 1e-6);
      if (score > best_score) {
        best_score = score;
        branch_pos = static_cast<int>(k);
      }
    }
    if (branch_pos < 0) {
      offer(x);
      closed_bound = std::max(closed_bound, value);
      return;
    }
    ++result.stats.branches;
    const int branch_var = int_vars[branch_pos];
    const double frac = x[branch_var] - std::floor(x[branch_var]);
    auto basis = std::make_shared<const Basis>(engine.basis());
    std::vector<double> il(num_int), iu(num_int);
    for (std::size_t k = 0; k < num_int; ++k) {
      il[k] = node_lower[int_vars[k]];
      iu[k] = node_upper[int_vars[k]];
    }
    Node down{il, iu, value, node.depth + 1, true, next_seq++, node.seq, basis, branch_pos, frac};
    down.int_upper[branch_pos] = std::floor(x[branch_var]);
    Node up{std::move(il), std::move(iu), value, node.depth + 1, false, next_seq++, node.seq, basis, branch_pos,
            1.0 - frac};
    up.int_lower[branch_pos] = std::ceil(x[branch_var]);
    if (frac < 0.5) {
      open.push(std::move(up));
      plunge = std::move(down);
    } else {
      open.push(std::move(down));
      plunge = std::move(up);
    }
    if (result.stats.branches == 1 || result.stats.branches % kDiveInterval == 0) {
      dive(node_lower, node_upper);
      last_solved = -1;
    }
  };

  {
    Node root;
    process(root, lower, upper);
  }
  if (options.on_node) options.on_node({result.stats.nodes, has_incumbent, incumbent, global_bound()});

  bool hit_limit = false;
  while (plunge || !open.empty()) {
    if (plunge && has_incumbent && plunge->bound <= incumbent + tolerance(incumbent)) {
      closed_bound = std::max(closed_bound, plunge->bound);
      plunge.reset();
      continue;
    }
    if (!plunge && has_incumbent && open.top().bound <= incumbent + tolerance(incumbent)) {
      closed_bound = std::max(closed_bound, open.top().bound);
      break;
    }
    if (result.stats.nodes >= options.node_limit) {
      hit_limit = true;
      break;
    }
    Node node;
    if (plunge) {
      node = std::move(*plunge);
      plunge.reset();
    } else {
      node = open.top();
      open.pop();
    }
    for (std::size_t k = 0; k < num_int; ++k) {
      lower[int_vars[k]] = node.int_lower[k];
      upper[int_vars[k]] = node.int_upper[k];
    }
    ++result.stats.nodes;
    outcome = node.parent == last_solved ? engine.resolve(lower, upper) : engine.resolve_from(*node.basis, lower, upper);
    last_solved = node.seq;
    if (outcome == LpOutcome::kOptimal) {
      process(node, lower, upper);
    } else if (outcome == LpOutcome::kUnbounded) {
      // A bounded root cannot have unbounded children; treat as numerical failure.
      throw std::runtime_error("solve_milp: unbounded node relaxation below a bounded root");
    }
    if (options.on_node) options.on_node({result.stats.nodes, has_incumbent, incumbent, global_bound()});
  }

  result.stats.simplex_iterations = engine.iterations();
  result.stats.wall_seconds = seconds_since(start);
  if (!has_incumbent) {
    result.status = hit_limit ? SolveStatus::kGapLimit : SolveStatus::kInfeasible;
    result.bound = hit_limit ? global_bound() : -kInfinity;
    return result;
  }
  result.objective_value = incumbent;
  result.assignment = std::move(incumbent_x);
  result.bound = std::max(incumbent, global_bound());
  const bool closed = result.bound - incumbent <= tolerance(incumbent);
  result.status = (hit_limit && !closed) ? SolveStatus::kGapLimit : SolveStatus::kOptimal;
  return result;
}

}  // namespace h2chain::milp
