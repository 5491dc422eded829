#include <chrono>
#include <cmath>
#include <stdexcept>

#include "h2chain/milp.hpp"
#include "simplex.hpp"

namespace h2chain::milp {

// Enumerates every integer assignment in odometer order (last integer variable
// fastest) and solves the continuous remainder at each point. The first
// strictly best point wins, so the result is reproducible bit for bit.
SolveResult brute_force_oracle(const LinearProgram& lp) {
  const auto start = std::chrono::steady_clock::now();
  lp.check();
  const double size = lattice_size(lp);
  if (!(size <= kOracleLatticeLimit)) {
    throw LatticeTooLargeError("brute_force_oracle: integer lattice has more than 1e6 points");
  }

  std::vector<int> int_vars;
  std::vector<double> first, last;
  for (int j = 0; j < lp.num_variables(); ++j) {
    if (!lp.is_integer(j)) continue;
    int_vars.push_back(j);
    first.push_back(std::ceil(lp.lower[j] - kIntegralityTol));
    last.push_back(std::floor(lp.upper[j] + kIntegralityTol));
  }

  LinearProgram relaxed = lp;
  for (VarType& t : relaxed.integrality) t = VarType::kContinuous;

  SolveResult result;
  result.status = SolveStatus::kInfeasible;
  result.bound = -kInfinity;
  if (size == 0.0) {
    result.stats.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
  }

  std::vector<double> point = first;
  std::vector<double> lower = relaxed.lower;
  std::vector<double> upper = relaxed.upper;
  for (;;) {
    for (std::size_t k = 0; k < int_vars.size(); ++k) lower[int_vars[k]] = upper[int_vars[k]] = point[k];
    relaxed.lower = lower;
    relaxed.upper = upper;
    detail::SimplexEngine engine(relaxed);
    const detail::LpOutcome outcome = engine.solve();
    ++result.stats.nodes;
    result.stats.simplex_iterations += engine.iterations();
    if (outcome == detail::LpOutcome::kUnbounded) {
      result.status = SolveStatus::kUnbounded;
      result.objective_value = kInfinity;
      result.bound = kInfinity;
      result.assignment.clear();
      break;
    }
    if (outcome == detail::LpOutcome::kOptimal) {
      std::vector<double> x = engine.primal();
      for (std::size_t k = 0; k < int_vars.size(); ++k) x[int_vars[k]] = point[k];
      const double value = lp.evaluate(x);
      if (result.status != SolveStatus::kOptimal || value > result.objective_value) {
        result.status = SolveStatus::kOptimal;
        result.objective_value = value;
        result.bound = value;
        result.assignment = std::move(x);
      }
    }
    // Advance the odometer.
    int k = static_cast<int>(int_vars.size()) - 1;
    while (k >= 0 && point[k] >= last[k]) {
      point[k] = first[k];
      --k;
    }
    if (k < 0) break;
    point[k] += 1.0;
  }
  result.stats.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

}  // namespace h2chain::milp
