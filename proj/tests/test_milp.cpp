#include <cmath>
#include <random>

#include "doctest.h"
#include "h2chain/milp.hpp"
#include "oracles.hpp"

using namespace h2chain::milp;
using h2chain::testing::random_program;
using h2chain::testing::vertex_enumeration_max;

namespace {

double rel_diff(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

LinearProgram knapsack() {
  LinearProgram lp;
  const int x = lp.add_variable(0, 1, VarType::kBinary, 5.0, "x");
  const int y = lp.add_variable(0, 1, VarType::kBinary, 4.0, "y");
  lp.add_constraint({{x, 3.0}, {y, 2.0}}, Relation::kLessEqual, 4.0);
  return lp;
}

// Consecutive-ones rows with integer data: the relaxation is integral.
LinearProgram interval_program() {
  LinearProgram lp;
  for (int j = 0; j < 5; ++j) lp.add_variable(0, 10, VarType::kInteger, 1.0 + 0.5 * j);
  lp.add_constraint({{0, 1}, {1, 1}, {2, 1}}, Relation::kLessEqual, 7);
  lp.add_constraint({{1, 1}, {2, 1}, {3, 1}}, Relation::kLessEqual, 5);
  lp.add_constraint({{2, 1}, {3, 1}, {4, 1}}, Relation::kLessEqual, 9);
  lp.add_constraint({{3, 1}, {4, 1}}, Relation::kGreaterEqual, 2);
  return lp;
}

}  // namespace

TEST_CASE("solve_lp: one-variable program") {
  LinearProgram lp;
  const int x = lp.add_variable(0, kInfinity, VarType::kContinuous, 1.0);
  lp.add_constraint({{x, 1.0}}, Relation::kLessEqual, 3.0);
  const SolveResult r = solve_lp(lp);
  REQUIRE(r.status == SolveStatus::kOptimal);
  CHECK(r.objective_value == doctest::Approx(3.0));
  CHECK(r.assignment[0] == doctest::Approx(3.0));
}

TEST_CASE("solve_lp: degenerate optimum face") {
  LinearProgram lp;
  lp.add_variable(0, kInfinity, VarType::kContinuous, 1.0);
  lp.add_variable(0, kInfinity, VarType::kContinuous, 1.0);
  lp.add_constraint({{0, 1.0}, {1, 1.0}}, Relation::kLessEqual, 1.0);
  const SolveResult r = solve_lp(lp);
  REQUIRE(r.status == SolveStatus::kOptimal);
  CHECK(r.objective_value == doctest::Approx(1.0));
  CHECK(lp.max_violation(r.assignment) <= kFeasibilityTol);
}

TEST_CASE("solve_lp: infeasible and unbounded are statuses") {
  LinearProgram infeasible;
  infeasible.add_variable(0, 5, VarType::kContinuous, 1.0);
  infeasible.add_constraint({{0, 1.0}}, Relation::kGreaterEqual, 6.0);
  CHECK(solve_lp(infeasible).status == SolveStatus::kInfeasible);

  LinearProgram unbounded;
  unbounded.add_variable(0, kInfinity, VarType::kContinuous, 1.0);
  unbounded.add_variable(-kInfinity, kInfinity, VarType::kContinuous, 0.0);
  unbounded.add_constraint({{0, 1.0}, {1, -1.0}}, Relation::kLessEqual, 2.0);
  CHECK(solve_lp(unbounded).status == SolveStatus::kUnbounded);
}

TEST_CASE("solve_lp: free variables and equality rows") {
  LinearProgram lp;
  lp.add_variable(-kInfinity, kInfinity, VarType::kContinuous, -1.0);
  lp.add_variable(-kInfinity, kInfinity, VarType::kContinuous, 2.0);
  lp.add_constraint({{0, 1.0}, {1, 1.0}}, Relation::kEqual, 4.0);
  lp.add_constraint({{0, 1.0}, {1, -1.0}}, Relation::kGreaterEqual, -2.0);
  const SolveResult r = solve_lp(lp);
  REQUIRE(r.status == SolveStatus::kOptimal);
  // y = 3, x = 1 -> -1 + 6
  CHECK(r.objective_value == doctest::Approx(5.0));
}

TEST_CASE("solve_lp: random dense programs agree with vertex enumeration") {
  std::mt19937_64 rng(20240601);
  std::uniform_int_distribution<int> dim(1, 8);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = dim(rng);
    const int m = dim(rng);
    const LinearProgram lp = random_program(rng, n, 0, m);
    const SolveResult r = solve_lp(lp);
    const double expected = vertex_enumeration_max(lp);
    INFO("trial " << trial << " n=" << n << " m=" << m);
    REQUIRE(r.status == SolveStatus::kOptimal);
    CHECK(lp.max_violation(r.assignment) <= kFeasibilityTol);
    CHECK(rel_diff(r.objective_value, expected) <= 1e-6);
  }
}

TEST_CASE("solve_lp: rejects integer variables") {
  CHECK_THROWS_AS(solve_lp(knapsack()), std::invalid_argument);
}

TEST_CASE("solve_milp: binary knapsack") {
  // Points (0,0)=0, (1,0)=5, (0,1)=4; (1,1) violates 3+2 <= 4.
  const SolveResult r = solve_milp(knapsack());
  REQUIRE(r.status == SolveStatus::kOptimal);
  CHECK(r.objective_value == doctest::Approx(5.0));
  CHECK(r.assignment[0] == 1.0);
  CHECK(r.assignment[1] == 0.0);
  CHECK(brute_force_oracle(knapsack()).objective_value == doctest::Approx(5.0));
}

TEST_CASE("solve_milp: integral relaxation needs no branching") {
  const LinearProgram lp = interval_program();
  LinearProgram relaxed = lp;
  for (auto& t : relaxed.integrality) t = VarType::kContinuous;
  const SolveResult lp_result = solve_lp(relaxed);
  const SolveResult r = solve_milp(lp);
  REQUIRE(r.status == SolveStatus::kOptimal);
  CHECK(r.stats.branches == 0);
  CHECK(r.objective_value == doctest::Approx(lp_result.objective_value));
  CHECK(brute_force_oracle(lp).objective_value == doctest::Approx(r.objective_value));
}

TEST_CASE("solve_milp: random small programs agree with the lattice oracle") {
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<int> ints(1, 6);
  std::uniform_int_distribution<int> conts(0, 6);
  std::uniform_int_distribution<int> rows(1, 6);
  for (int trial = 0; trial < 50; ++trial) {
    const LinearProgram lp = random_program(rng, conts(rng), ints(rng), rows(rng));
    const SolveResult bb = solve_milp(lp);
    const SolveResult oracle = brute_force_oracle(lp);
    INFO("trial " << trial);
    REQUIRE(oracle.status == SolveStatus::kOptimal);
    REQUIRE(bb.status == SolveStatus::kOptimal);
    CHECK(lp.max_violation(bb.assignment) <= 1e-6);
    CHECK(std::abs(bb.objective_value - oracle.objective_value) <= 1e-6 * std::max(1.0, std::abs(oracle.objective_value)));
  }
}

TEST_CASE("solve_milp: weak duality holds at every node") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const LinearProgram lp = random_program(rng, 4, 6, 5);
    MilpOptions options;
    bool ok = true;
    options.on_node = [&](const NodeEvent& e) {
      if (e.has_incumbent && e.incumbent > e.global_bound + options.gap_tol * std::abs(e.global_bound) + 1e-9) ok = false;
    };
    const SolveResult r = solve_milp(lp, options);
    CHECK(ok);
    if (r.status == SolveStatus::kOptimal) CHECK(r.bound - r.objective_value <= options.gap_tol * std::max(1.0, std::abs(r.objective_value)) + 1e-9);
  }
}

TEST_CASE("solve_milp: deterministic results") {
  std::mt19937_64 rng(11);
  const LinearProgram lp = random_program(rng, 5, 6, 6);
  const SolveResult a = solve_milp(lp);
  const SolveResult b = solve_milp(lp);
  CHECK(a.status == b.status);
  CHECK(a.objective_value == b.objective_value);
  CHECK(a.bound == b.bound);
  CHECK(a.assignment == b.assignment);
  CHECK(a.stats.nodes == b.stats.nodes);
  CHECK(a.stats.simplex_iterations == b.stats.simplex_iterations);
}

TEST_CASE("solve_milp: node limit returns the incumbent with gap_limit") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 30; ++trial) {
    const LinearProgram lp = random_program(rng, 3, 6, 6);
    MilpOptions options;
    options.node_limit = 2;
    const SolveResult r = solve_milp(lp, options);
    if (r.status == SolveStatus::kGapLimit && r.has_solution()) {
      CHECK(r.bound >= r.objective_value);
      CHECK(lp.max_violation(r.assignment) <= 1e-6);
      return;
    }
  }
  WARN("no instance stopped at the node limit");
}

TEST_CASE("solve_milp: infeasible integer model") {
  LinearProgram lp;
  lp.add_variable(0, 3, VarType::kInteger, 1.0);
  lp.add_constraint({{0, 2.0}}, Relation::kEqual, 3.0);
  CHECK(solve_milp(lp).status == SolveStatus::kInfeasible);
  CHECK(brute_force_oracle(lp).status == SolveStatus::kInfeasible);
}

TEST_CASE("brute_force_oracle: continuous input matches solve_lp") {
  std::mt19937_64 rng(9);
  const LinearProgram lp = random_program(rng, 6, 0, 5);
  const SolveResult a = solve_lp(lp);
  const SolveResult b = brute_force_oracle(lp);
  CHECK(b.status == a.status);
  CHECK(b.objective_value == a.objective_value);
  CHECK(b.assignment == a.assignment);
}

TEST_CASE("brute_force_oracle: lattice guard") {
  LinearProgram lp;
  for (int j = 0; j < 7; ++j) lp.add_variable(0, 9, VarType::kInteger, 1.0);
  CHECK(lattice_size(lp) == doctest::Approx(1e7));
  CHECK_THROWS_AS(brute_force_oracle(lp), LatticeTooLargeError);
  LinearProgram open_ended;
  open_ended.add_variable(0, kInfinity, VarType::kInteger, 1.0);
  CHECK_THROWS_AS(brute_force_oracle(open_ended), LatticeTooLargeError);
}

TEST_CASE("write_lp_format: fixed-point dump") {
  const std::string text = write_lp_format(knapsack());
  CHECK(text ==
        "\\ h2chain LP dump\n"
        "Maximize\n"
        " obj: + 5.000000000 x + 4.000000000 y\n"
        "Subject To\n"
        " c0: + 3.000000000 x + 2.000000000 y <= 4.000000000\n"
        "Bounds\n"
        " 0.000000000 <= x <= 1.000000000\n"
        " 0.000000000 <= y <= 1.000000000\n"
        "Binary\n"
        " x\n"
        " y\n"
        "End\n");
}

TEST_CASE("LinearProgram::check rejects inverted bounds") {
  LinearProgram lp;
  lp.add_variable(2.0, 1.0);
  CHECK_THROWS_AS(lp.check(), std::invalid_argument);
}
