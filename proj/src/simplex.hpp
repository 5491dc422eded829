// Internal bounded revised simplex shared by solve_lp, branch-and-bound and
// the lattice oracle.

#ifndef H2CHAIN_SRC_SIMPLEX_HPP
#define H2CHAIN_SRC_SIMPLEX_HPP

#include <cstdint>
#include <memory>
#include <vector>

#include "h2chain/milp.hpp"

namespace h2chain::milp::detail {

enum class LpOutcome { kOptimal, kInfeasible, kUnbounded };

enum class VarStatus : std::uint8_t { kBasic, kAtLower, kAtUpper, kFreeZero };

struct Basis {
  std::vector<int> head;              // column basic in each row
  std::vector<VarStatus> status;      // per column
};

// Columns: [0, n) structural, [n, n+m) row slacks, [n+m, n+2m) artificials.
// Each row reads  a_i . x + s_i (+/- art_i) = b_i  and the engine minimizes the
// negated objective internally.
class SimplexEngine {
 public:
  explicit SimplexEngine(const LinearProgram& lp);

  // Two-phase primal simplex from a slack/artificial basis.
  LpOutcome solve();

  // Replaces structural bounds and re-optimizes from the current basis with
  // the dual simplex; falls back to solve() when the basis cannot be made dual
  // feasible.
  LpOutcome resolve(const std::vector<double>& lower, const std::vector<double>& upper);

  // Re-optimizes from a stored basis under new structural bounds.
  LpOutcome resolve_from(const Basis& basis, const std::vector<double>& lower, const std::vector<double>& upper);

  double objective() const;  // maximization sense, including the constant
  std::vector<double> primal() const;
  Basis basis() const { return {head_, status_}; }
  std::int64_t iterations() const { return iterations_; }

 private:
  enum class Phase { kOne, kTwo };

  void scale_problem();
  void set_structural_bounds(const std::vector<double>& lower, const std::vector<double>& upper);
  void initial_basis();
  bool refactor();
  void compute_basic_values();
  void compute_duals(const std::vector<double>& cost, std::vector<double>& y) const;
  double reduced_cost(int j, const std::vector<double>& cost, const std::vector<double>& y) const;
  void column_times_binv(int j, std::vector<double>& alpha) const;
  void pivot(int row, const std::vector<double>& alpha);
  void place_nonbasic(int j);
  LpOutcome primal_loop(const std::vector<double>& cost);
  LpOutcome dual_loop();
  bool make_dual_feasible();
  void tick();

  int n_ = 0;  // structural
  int m_ = 0;  // rows
  int total_ = 0;
  double objective_constant_ = 0.0;
  std::vector<std::vector<std::pair<int, double>>> columns_;  // sparse structural columns
  std::vector<double> art_sign_;
  std::vector<double> rhs_;
  std::vector<double> lo_, up_;
  std::vector<double> col_scale_;  // powers of two
  std::vector<double> cost2_;  // phase-two costs (minimize)
  std::vector<double> x_;
  std::vector<int> head_;
  std::vector<int> row_of_;  // -1 when nonbasic
  std::vector<VarStatus> status_;
  std::vector<double> binv_;  // m x m row-major
  int pivots_since_refactor_ = 0;
  std::int64_t iterations_ = 0;
  std::int64_t iteration_limit_ = 0;
  bool factor_valid_ = false;
};

}  // namespace h2chain::milp::detail

#endif  // H2CHAIN_SRC_SIMPLEX_HPP
