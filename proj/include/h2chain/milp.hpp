// Linear and mixed-integer programming core.
//
// Every model is a maximization over box-bounded variables with dense
// constraint rows. `solve_lp` runs a bounded revised simplex, `solve_milp`
// wraps it in best-first branch-and-bound, and `brute_force_oracle`
// enumerates the integer lattice for verification.

#ifndef H2CHAIN_MILP_HPP
#define H2CHAIN_MILP_HPP

#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace h2chain::milp {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();
inline constexpr double kFeasibilityTol = 1e-7;
inline constexpr double kIntegralityTol = 1e-6;
inline constexpr double kDefaultGapTol = 1e-6;

enum class Relation { kLessEqual, kEqual, kGreaterEqual };
enum class VarType { kContinuous, kInteger, kBinary };

struct Constraint {
  std::vector<double> coefficients;
  Relation relation = Relation::kLessEqual;
  double rhs = 0.0;
  std::string name;
};

struct LinearProgram {
  std::vector<double> objective;  // maximized
  double objective_constant = 0.0;
  std::vector<Constraint> constraints;
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<VarType> integrality;
  std::vector<std::string> names;  // optional; empty or one per variable

  int num_variables() const { return static_cast<int>(objective.size()); }
  int num_constraints() const { return static_cast<int>(constraints.size()); }

  // Appends a variable; binary variables get bounds clipped to [0, 1].
  int add_variable(double lower_bound, double upper_bound, VarType type = VarType::kContinuous,
                   double objective_coefficient = 0.0, std::string name = {});

  // Terms are (variable, coefficient); repeated variables accumulate.
  void add_constraint(std::span<const std::pair<int, double>> terms, Relation relation, double rhs,
                      std::string name = {});
  void add_constraint(std::initializer_list<std::pair<int, double>> terms, Relation relation, double rhs,
                      std::string name = {});

  bool is_integer(int var) const { return integrality[var] != VarType::kContinuous; }
  bool has_integers() const;

  // Throws std::invalid_argument when dimensions or bounds are inconsistent.
  void check() const;

  double evaluate(std::span<const double> x) const;
  // Largest bound or row violation of `x` (0 when feasible).
  double max_violation(std::span<const double> x) const;
};

enum class SolveStatus { kOptimal, kInfeasible, kUnbounded, kGapLimit };

const char* to_string(SolveStatus status);

struct SolveStats {
  std::int64_t nodes = 0;     // LP relaxations solved (B&B nodes or lattice points)
  std::int64_t branches = 0;  // branching operations
  std::int64_t simplex_iterations = 0;
  double wall_seconds = 0.0;
};

struct SolveResult {
  SolveStatus status = SolveStatus::kInfeasible;
  double objective_value = -kInfinity;
  std::vector<double> assignment;
  double bound = kInfinity;  // best proven upper bound (maximization)
  SolveStats stats;

  bool has_solution() const { return !assignment.empty(); }
  // (bound - objective) / max(1, |objective|)
  double relative_gap() const;
};

// Snapshot passed to MilpOptions::on_node after every processed node.
struct NodeEvent {
  std::int64_t node = 0;
  bool has_incumbent = false;
  double incumbent = -kInfinity;
  double global_bound = kInfinity;
};

struct MilpOptions {
  double gap_tol = kDefaultGapTol;
  std::int64_t node_limit = 1'000'000;
  std::function<void(const NodeEvent&)> on_node;
};

class LatticeTooLargeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kOracleLatticeLimit = 1e6;

SolveResult solve_lp(const LinearProgram& lp);
SolveResult solve_milp(const LinearProgram& lp, const MilpOptions& options = {});
SolveResult brute_force_oracle(const LinearProgram& lp);

// Number of integer points in the bounding box of the integer variables
// (infinite when any integer bound is infinite).
double lattice_size(const LinearProgram& lp);

// LP-style text dump; grammar in docs/lp_format.md.
std::string write_lp_format(const LinearProgram& lp);

}  // namespace h2chain::milp

#endif  // H2CHAIN_MILP_HPP
