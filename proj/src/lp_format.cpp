#include <cmath>
#include <string>

#include <fmt/format.h>

#include "h2chain/milp.hpp"

namespace h2chain::milp {

namespace {

std::string number(double v) {
  if (v == kInfinity) return "+inf";
  if (v == -kInfinity) return "-inf";
  if (v == 0.0) v = 0.0;  // drops the sign of -0
  return fmt::format("{:.9f}", v);
}

std::string var_name(const LinearProgram& lp, int j) {
  if (!lp.names.empty() && !lp.names[j].empty()) return lp.names[j];
  return fmt::format("x{}", j);
}

void append_terms(std::string& out, const LinearProgram& lp, const std::vector<double>& coefficients) {
  bool any = false;
  for (int j = 0; j < lp.num_variables(); ++j) {
    const double a = coefficients[j];
    if (a == 0.0) continue;
    out += fmt::format(" {} {} {}", a < 0.0 ? '-' : '+', number(std::abs(a)), var_name(lp, j));
    any = true;
  }
  if (!any) out += " + 0.000000000 " + (lp.num_variables() > 0 ? var_name(lp, 0) : std::string("x0"));
}

}  // namespace

std::string write_lp_format(const LinearProgram& lp) {
  lp.check();
  std::string out = "\\ h2chain LP dump\nMaximize\n obj:";
  append_terms(out, lp, lp.objective);
  if (lp.objective_constant != 0.0) {
    out += fmt::format(" {} {}", lp.objective_constant < 0.0 ? '-' : '+', number(std::abs(lp.objective_constant)));
  }
  out += "\nSubject To\n";
  for (int i = 0; i < lp.num_constraints(); ++i) {
    const Constraint& c = lp.constraints[i];
    out += fmt::format(" {}:", c.name.empty() ? fmt::format("c{}", i) : c.name);
    append_terms(out, lp, c.coefficients);
    const char* rel = c.relation == Relation::kLessEqual ? "<=" : c.relation == Relation::kEqual ? "=" : ">=";
    out += fmt::format(" {} {}\n", rel, number(c.rhs));
  }
  out += "Bounds\n";
  for (int j = 0; j < lp.num_variables(); ++j) {
    const std::string name = var_name(lp, j);
    if (lp.lower[j] == -kInfinity && lp.upper[j] == kInfinity) {
      out += fmt::format(" {} free\n", name);
    } else {
      out += fmt::format(" {} <= {} <= {}\n", number(lp.lower[j]), name, number(lp.upper[j]));
    }
  }
  std::string general, binary;
  for (int j = 0; j < lp.num_variables(); ++j) {
    if (lp.integrality[j] == VarType::kInteger) general += " " + var_name(lp, j) + "\n";
    if (lp.integrality[j] == VarType::kBinary) binary += " " + var_name(lp, j) + "\n";
  }
  if (!general.empty()) out += "General\n" + general;
  if (!binary.empty()) out += "Binary\n" + binary;
  out += "End\n";
  return out;
}

}  // namespace h2chain::milp
