#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "h2chain/milp.hpp"

namespace h2chain::milp {

int LinearProgram::add_variable(double lower_bound, double upper_bound, VarType type, double objective_coefficient,
                                std::string name) {
  if (type == VarType::kBinary) {
    lower_bound = std::max(lower_bound, 0.0);
    upper_bound = std::min(upper_bound, 1.0);
  }
  objective.push_back(objective_coefficient);
  lower.push_back(lower_bound);
  upper.push_back(upper_bound);
  integrality.push_back(type);
  if (!name.empty() || !names.empty()) {
    names.resize(objective.size() - 1);
    names.push_back(std::move(name));
  }
  for (Constraint& c : constraints) c.coefficients.resize(objective.size(), 0.0);
  return num_variables() - 1;
}

void LinearProgram::add_constraint(std::span<const std::pair<int, double>> terms, Relation relation, double rhs,
                                   std::string name) {
  Constraint c;
  c.coefficients.assign(objective.size(), 0.0);
  for (auto [var, coef] : terms) {
    if (var < 0 || var >= num_variables()) throw std::out_of_range("add_constraint: unknown variable");
    c.coefficients[var] += coef;
  }
  c.relation = relation;
  c.rhs = rhs;
  c.name = std::move(name);
  constraints.push_back(std::move(c));
}

void LinearProgram::add_constraint(std::initializer_list<std::pair<int, double>> terms, Relation relation, double rhs,
                                   std::string name) {
  add_constraint(std::span<const std::pair<int, double>>(terms.begin(), terms.size()), relation, rhs,
                 std::move(name));
}

bool LinearProgram::has_integers() const {
  return std::any_of(integrality.begin(), integrality.end(), [](VarType t) { return t != VarType::kContinuous; });
}

void LinearProgram::check() const {
  const std::size_t n = objective.size();
  if (lower.size() != n || upper.size() != n || integrality.size() != n) {
    throw std::invalid_argument("LinearProgram: objective, bounds and integrality must share one dimension");
  }
  if (!names.empty() && names.size() != n) throw std::invalid_argument("LinearProgram: names size mismatch");
  for (std::size_t j = 0; j < n; ++j) {
    if (std::isnan(lower[j]) || std::isnan(upper[j]) || lower[j] > upper[j]) {
      throw std::invalid_argument("LinearProgram: lower > upper for variable " + std::to_string(j));
    }
    if (!std::isfinite(objective[j])) throw std::invalid_argument("LinearProgram: non-finite objective");
  }
  for (const Constraint& c : constraints) {
    if (c.coefficients.size() != n) throw std::invalid_argument("LinearProgram: constraint dimension mismatch");
    if (!std::isfinite(c.rhs)) throw std::invalid_argument("LinearProgram: non-finite right-hand side");
  }
}

double LinearProgram::evaluate(std::span<const double> x) const {
  double v = objective_constant;
  for (int j = 0; j < num_variables(); ++j) v += objective[j] * x[j];
  return v;
}

double LinearProgram::max_violation(std::span<const double> x) const {
  double worst = 0.0;
  for (int j = 0; j < num_variables(); ++j) {
    worst = std::max({worst, lower[j] - x[j], x[j] - upper[j]});
  }
  for (const Constraint& c : constraints) {
    double lhs = 0.0;
    for (int j = 0; j < num_variables(); ++j) lhs += c.coefficients[j] * x[j];
    switch (c.relation) {
      case Relation::kLessEqual: worst = std::max(worst, lhs - c.rhs); break;
      case Relation::kGreaterEqual: worst = std::max(worst, c.rhs - lhs); break;
      case Relation::kEqual: worst = std::max(worst, std::abs(lhs - c.rhs)); break;
    }
  }
  return worst;
}

const char* to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::kOptimal: return "optimal";
    case SolveStatus::kInfeasible: return "infeasible";
    case SolveStatus::kUnbounded: return "unbounded";
    case SolveStatus::kGapLimit: return "gap_limit";
  }
  return "unknown";
}

double SolveResult::relative_gap() const {
  if (!has_solution()) return kInfinity;
  return (bound - objective_value) / std::max(1.0, std::abs(objective_value));
}

double lattice_size(const LinearProgram& lp) {
  double size = 1.0;
  for (int j = 0; j < lp.num_variables(); ++j) {
    if (!lp.is_integer(j)) continue;
    const double lo = std::ceil(lp.lower[j] - kIntegralityTol);
    const double hi = std::floor(lp.upper[j] + kIntegralityTol);
    if (!std::isfinite(lo) || !std::isfinite(hi)) return kInfinity;
    size *= std::max(0.0, hi - lo + 1.0);
  }
  return size;
}

}  // namespace h2chain::milp
