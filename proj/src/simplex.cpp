#include "simplex.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace h2chain::milp::detail {

namespace {

constexpr double kPivotTol = 1e-7;
constexpr double kRelativePivotTol = 1e-9;
constexpr double kOptimalityTol = 1e-9;
constexpr double kStepTol = 1e-12;
constexpr int kRefactorInterval = 50;
constexpr int kStallLimit = 30;

bool finite(double v) { return std::isfinite(v); }

}  // namespace

SimplexEngine::SimplexEngine(const LinearProgram& lp) {
  lp.check();
  n_ = lp.num_variables();
  m_ = lp.num_constraints();
  total_ = n_ + 2 * m_;
  objective_constant_ = lp.objective_constant;

  columns_.assign(n_, {});
  rhs_.resize(m_);
  art_sign_.assign(m_, 1.0);
  lo_.assign(total_, 0.0);
  up_.assign(total_, 0.0);
  cost2_.assign(total_, 0.0);
  for (int i = 0; i < m_; ++i) {
    const Constraint& row = lp.constraints[i];
    for (int j = 0; j < n_; ++j) {
      if (row.coefficients[j] != 0.0) columns_[j].emplace_back(i, row.coefficients[j]);
    }
    rhs_[i] = row.rhs;
    switch (row.relation) {
      case Relation::kLessEqual:
        lo_[n_ + i] = 0.0;
        up_[n_ + i] = kInfinity;
        break;
      case Relation::kGreaterEqual:
        lo_[n_ + i] = -kInfinity;
        up_[n_ + i] = 0.0;
        break;
      case Relation::kEqual:
        break;
    }
  }
  scale_problem();
  for (int j = 0; j < n_; ++j) cost2_[j] = -lp.objective[j] * col_scale_[j];
  set_structural_bounds(lp.lower, lp.upper);
  x_.assign(total_, 0.0);
  status_.assign(total_, VarStatus::kAtLower);
  row_of_.assign(total_, -1);
  head_.assign(m_, 0);
  binv_.assign(static_cast<std::size_t>(m_) * m_, 0.0);
}

void SimplexEngine::tick() {
  if (++iterations_ > iteration_limit_) throw std::runtime_error("simplex: iteration limit exceeded");
}

void SimplexEngine::scale_problem() {
  // Geometric-mean row and column scaling rounded to powers of two, so the
  // scaled problem carries no rounding of its own. Structural x = col_scale * x'.
  col_scale_.assign(n_, 1.0);
  std::vector<double> row_scale(m_, 1.0);
  auto pow2 = [](double v) { return std::exp2(std::round(std::log2(v))); };
  for (int pass = 0; pass < 4; ++pass) {
    std::vector<double> lo(m_, kInfinity), hi(m_, 0.0);
    for (int j = 0; j < n_; ++j) {
      for (auto [i, a] : columns_[j]) {
        const double v = std::abs(a) * row_scale[i] * col_scale_[j];
        lo[i] = std::min(lo[i], v);
        hi[i] = std::max(hi[i], v);
      }
    }
    for (int i = 0; i < m_; ++i) {
      if (hi[i] > 0.0) row_scale[i] *= pow2(1.0 / std::sqrt(lo[i] * hi[i]));
    }
    for (int j = 0; j < n_; ++j) {
      double clo = kInfinity, chi = 0.0;
      for (auto [i, a] : columns_[j]) {
        const double v = std::abs(a) * row_scale[i] * col_scale_[j];
        clo = std::min(clo, v);
        chi = std::max(chi, v);
      }
      if (chi > 0.0) col_scale_[j] *= pow2(1.0 / std::sqrt(clo * chi));
    }
  }
  for (int j = 0; j < n_; ++j) {
    for (auto& [i, a] : columns_[j]) a *= row_scale[i] * col_scale_[j];
  }
  for (int i = 0; i < m_; ++i) rhs_[i] *= row_scale[i];
}

void SimplexEngine::set_structural_bounds(const std::vector<double>& lower, const std::vector<double>& upper) {
  for (int j = 0; j < n_; ++j) {
    lo_[j] = lower[j] / col_scale_[j];
    up_[j] = upper[j] / col_scale_[j];
  }
}

void SimplexEngine::place_nonbasic(int j) {
  // Keeps the requested side when it is finite, otherwise moves to the other.
  VarStatus s = status_[j];
  if (s == VarStatus::kAtUpper && !finite(up_[j])) s = VarStatus::kAtLower;
  if (s == VarStatus::kAtLower && !finite(lo_[j])) s = finite(up_[j]) ? VarStatus::kAtUpper : VarStatus::kFreeZero;
  if (s == VarStatus::kFreeZero && finite(lo_[j])) s = VarStatus::kAtLower;
  if (s == VarStatus::kFreeZero && finite(up_[j])) s = VarStatus::kAtUpper;
  status_[j] = s;
  x_[j] = s == VarStatus::kAtLower ? lo_[j] : s == VarStatus::kAtUpper ? up_[j] : 0.0;
}

void SimplexEngine::initial_basis() {
  std::fill(row_of_.begin(), row_of_.end(), -1);
  for (int j = 0; j < n_; ++j) {
    status_[j] = VarStatus::kAtLower;
    place_nonbasic(j);
  }
  std::vector<double> residual = rhs_;
  for (int j = 0; j < n_; ++j) {
    if (x_[j] == 0.0) continue;
    for (auto [i, a] : columns_[j]) residual[i] -= a * x_[j];
  }
  for (int i = 0; i < m_; ++i) {
    const int slack = n_ + i;
    const int art = n_ + m_ + i;
    const double r = residual[i];
    if (r >= lo_[slack] - kFeasibilityTol && r <= up_[slack] + kFeasibilityTol) {
      head_[i] = slack;
      status_[slack] = VarStatus::kBasic;
      row_of_[slack] = i;
      x_[slack] = r;
      lo_[art] = up_[art] = 0.0;
      status_[art] = VarStatus::kAtLower;
      x_[art] = 0.0;
    } else {
      const double s = std::clamp(r, lo_[slack], up_[slack]);
      status_[slack] = s == lo_[slack] ? VarStatus::kAtLower : VarStatus::kAtUpper;
      x_[slack] = s;
      art_sign_[i] = r - s >= 0.0 ? 1.0 : -1.0;
      lo_[art] = 0.0;
      up_[art] = kInfinity;
      head_[i] = art;
      status_[art] = VarStatus::kBasic;
      row_of_[art] = i;
      x_[art] = std::abs(r - s);
    }
  }
  // The initial basis is a signed identity.
  std::fill(binv_.begin(), binv_.end(), 0.0);
  for (int i = 0; i < m_; ++i) {
    binv_[static_cast<std::size_t>(i) * m_ + i] = head_[i] >= n_ + m_ ? art_sign_[i] : 1.0;
  }
  pivots_since_refactor_ = 0;
  factor_valid_ = true;
}

bool SimplexEngine::refactor() {
  const std::size_t m = static_cast<std::size_t>(m_);
  std::vector<double> b(m * m, 0.0);
  for (int k = 0; k < m_; ++k) {
    const int j = head_[k];
    if (j < n_) {
      for (auto [i, a] : columns_[j]) b[static_cast<std::size_t>(i) * m + k] = a;
    } else if (j < n_ + m_) {
      b[static_cast<std::size_t>(j - n_) * m + k] = 1.0;
    } else {
      b[static_cast<std::size_t>(j - n_ - m_) * m + k] = art_sign_[j - n_ - m_];
    }
  }
  std::vector<double>& inv = binv_;
  std::fill(inv.begin(), inv.end(), 0.0);
  for (std::size_t i = 0; i < m; ++i) inv[i * m + i] = 1.0;
  for (std::size_t col = 0; col < m; ++col) {
    std::size_t best = col;
    double best_abs = std::abs(b[col * m + col]);
    for (std::size_t r = col + 1; r < m; ++r) {
      const double v = std::abs(b[r * m + col]);
      if (v > best_abs) {
        best_abs = v;
        best = r;
      }
    }
    if (best_abs < 1e-12) {
      factor_valid_ = false;
      return false;
    }
    if (best != col) {
      std::swap_ranges(b.begin() + best * m, b.begin() + best * m + m, b.begin() + col * m);
      std::swap_ranges(inv.begin() + best * m, inv.begin() + best * m + m, inv.begin() + col * m);
    }
    const double p = 1.0 / b[col * m + col];
    for (std::size_t k = 0; k < m; ++k) {
      b[col * m + k] *= p;
      inv[col * m + k] *= p;
    }
    for (std::size_t r = 0; r < m; ++r) {
      if (r == col) continue;
      const double f = b[r * m + col];
      if (f == 0.0) continue;
      for (std::size_t k = 0; k < m; ++k) {
        b[r * m + k] -= f * b[col * m + k];
        inv[r * m + k] -= f * inv[col * m + k];
      }
    }
  }
  pivots_since_refactor_ = 0;
  factor_valid_ = true;
  return true;
}

void SimplexEngine::compute_basic_values() {
  std::vector<double> r = rhs_;
  for (int j = 0; j < total_; ++j) {
    if (status_[j] == VarStatus::kBasic || x_[j] == 0.0) continue;
    if (j < n_) {
      for (auto [i, a] : columns_[j]) r[i] -= a * x_[j];
    } else if (j < n_ + m_) {
      r[j - n_] -= x_[j];
    } else {
      r[j - n_ - m_] -= art_sign_[j - n_ - m_] * x_[j];
    }
  }
  const std::size_t m = static_cast<std::size_t>(m_);
  for (int k = 0; k < m_; ++k) {
    double v = 0.0;
    const double* row = &binv_[k * m];
    for (std::size_t i = 0; i < m; ++i) v += row[i] * r[i];
    x_[head_[k]] = v;
  }
}

void SimplexEngine::compute_duals(const std::vector<double>& cost, std::vector<double>& y) const {
  const std::size_t m = static_cast<std::size_t>(m_);
  y.assign(m, 0.0);
  for (int k = 0; k < m_; ++k) {
    const double c = cost[head_[k]];
    if (c == 0.0) continue;
    const double* row = &binv_[k * m];
    for (std::size_t i = 0; i < m; ++i) y[i] += c * row[i];
  }
}

double SimplexEngine::reduced_cost(int j, const std::vector<double>& cost, const std::vector<double>& y) const {
  double d = cost[j];
  if (j < n_) {
    for (auto [i, a] : columns_[j]) d -= y[i] * a;
  } else if (j < n_ + m_) {
    d -= y[j - n_];
  } else {
    d -= y[j - n_ - m_] * art_sign_[j - n_ - m_];
  }
  return d;
}

void SimplexEngine::column_times_binv(int j, std::vector<double>& alpha) const {
  const std::size_t m = static_cast<std::size_t>(m_);
  alpha.assign(m, 0.0);
  auto add = [&](int i, double a) {
    for (std::size_t k = 0; k < m; ++k) alpha[k] += binv_[k * m + i] * a;
  };
  if (j < n_) {
    for (auto [i, a] : columns_[j]) add(i, a);
  } else if (j < n_ + m_) {
    add(j - n_, 1.0);
  } else {
    add(j - n_ - m_, art_sign_[j - n_ - m_]);
  }
}

void SimplexEngine::pivot(int row, const std::vector<double>& alpha) {
  const std::size_t m = static_cast<std::size_t>(m_);
  double* pivot_row = &binv_[row * m];
  const double inv = 1.0 / alpha[row];
  for (std::size_t i = 0; i < m; ++i) pivot_row[i] *= inv;
  for (int k = 0; k < m_; ++k) {
    if (k == row || alpha[k] == 0.0) continue;
    double* target = &binv_[k * m];
    const double f = alpha[k];
    for (std::size_t i = 0; i < m; ++i) target[i] -= f * pivot_row[i];
  }
  if (++pivots_since_refactor_ >= kRefactorInterval) {
    if (!refactor()) throw std::runtime_error("simplex: singular basis during refactorization");
    compute_basic_values();
  }
}

LpOutcome SimplexEngine::primal_loop(const std::vector<double>& cost) {
  double cost_scale = 1.0;
  for (double c : cost) cost_scale = std::max(cost_scale, std::abs(c));
  const double opt_tol = kOptimalityTol * cost_scale;
  std::vector<double> y;
  std::vector<double> alpha;
  int stall = 0;
  bool bland = false;
  for (;;) {
    compute_duals(cost, y);
    int enter = -1;
    double enter_d = 0.0;
    double best_score = 0.0;
    for (int j = 0; j < total_; ++j) {
      const VarStatus s = status_[j];
      if (s == VarStatus::kBasic || lo_[j] == up_[j]) continue;
      const double d = reduced_cost(j, cost, y);
      bool eligible = false;
      if (s == VarStatus::kAtLower) eligible = d < -opt_tol;
      else if (s == VarStatus::kAtUpper) eligible = d > opt_tol;
      else eligible = std::abs(d) > opt_tol;
      if (!eligible) continue;
      if (bland) {
        enter = j;
        enter_d = d;
        break;
      }
      if (std::abs(d) > best_score) {
        best_score = std::abs(d);
        enter = j;
        enter_d = d;
      }
    }
    if (enter < 0) return LpOutcome::kOptimal;
    tick();

    const double dir = enter_d < 0.0 ? 1.0 : -1.0;
    column_times_binv(enter, alpha);
    // Harris two-pass ratio test: bound the step with slightly relaxed bounds,
    // then take the largest pivot among rows blocking within that step.
    const double range = (finite(lo_[enter]) && finite(up_[enter])) ? up_[enter] - lo_[enter] : kInfinity;
    double alpha_max = 0.0;
    for (double a : alpha) alpha_max = std::max(alpha_max, std::abs(a));
    const double pivot_tol = std::max(kPivotTol, kRelativePivotTol * alpha_max);
    double relaxed = range;
    for (int k = 0; k < m_; ++k) {
      const double rate = -dir * alpha[k];
      if (std::abs(rate) <= pivot_tol) continue;
      const int b = head_[k];
      if (rate < 0.0 && finite(lo_[b])) relaxed = std::min(relaxed, (x_[b] - lo_[b] + kFeasibilityTol) / -rate);
      if (rate > 0.0 && finite(up_[b])) relaxed = std::min(relaxed, (up_[b] - x_[b] + kFeasibilityTol) / rate);
    }
    double theta = range;
    int leave_row = -1;
    if (relaxed < range) {
      double leave_abs = 0.0;
      for (int k = 0; k < m_; ++k) {
        const double rate = -dir * alpha[k];
        if (std::abs(rate) <= pivot_tol) continue;
        const int b = head_[k];
        double ratio;
        if (rate < 0.0) {
          if (!finite(lo_[b])) continue;
          ratio = std::max(0.0, (x_[b] - lo_[b]) / -rate);
        } else {
          if (!finite(up_[b])) continue;
          ratio = std::max(0.0, (up_[b] - x_[b]) / rate);
        }
        if (ratio > relaxed) continue;
        bool take;
        if (leave_row < 0) take = true;
        else if (bland) take = head_[k] < head_[leave_row];
        else take = std::abs(alpha[k]) > leave_abs;
        if (take) {
          theta = ratio;
          leave_row = k;
          leave_abs = std::abs(alpha[k]);
        }
      }
    }
    if (!finite(theta)) return LpOutcome::kUnbounded;

    if (theta <= kStepTol) {
      if (++stall > kStallLimit) bland = true;
    } else {
      stall = 0;
      bland = false;
    }

    x_[enter] += dir * theta;
    for (int k = 0; k < m_; ++k) x_[head_[k]] -= dir * theta * alpha[k];

    if (leave_row < 0) {
      status_[enter] = dir > 0 ? VarStatus::kAtUpper : VarStatus::kAtLower;
      x_[enter] = dir > 0 ? up_[enter] : lo_[enter];
      continue;
    }
    const int leave = head_[leave_row];
    const double rate = -dir * alpha[leave_row];
    if (rate < 0.0) {
      status_[leave] = VarStatus::kAtLower;
      x_[leave] = lo_[leave];
    } else {
      status_[leave] = VarStatus::kAtUpper;
      x_[leave] = up_[leave];
    }
    row_of_[leave] = -1;
    head_[leave_row] = enter;
    row_of_[enter] = leave_row;
    status_[enter] = VarStatus::kBasic;
    pivot(leave_row, alpha);
  }
}

LpOutcome SimplexEngine::dual_loop() {
  const std::size_t m = static_cast<std::size_t>(m_);
  std::vector<double> y;
  std::vector<double> alpha;
  std::vector<double> rho(m);
  int stall = 0;
  bool bland = false;
  for (;;) {
    int leave_row = -1;
    double worst = 0.0;
    for (int k = 0; k < m_; ++k) {
      const int b = head_[k];
      double infeas = 0.0;
      if (x_[b] < lo_[b] - kFeasibilityTol) infeas = lo_[b] - x_[b];
      else if (x_[b] > up_[b] + kFeasibilityTol) infeas = x_[b] - up_[b];
      if (infeas <= 0.0) continue;
      if (bland) {
        if (leave_row < 0 || b < head_[leave_row]) leave_row = k;
      } else if (infeas > worst) {
        worst = infeas;
        leave_row = k;
      }
    }
    if (leave_row < 0) return LpOutcome::kOptimal;
    tick();

    const int leave = head_[leave_row];
    const bool to_lower = x_[leave] < lo_[leave];
    std::copy_n(&binv_[leave_row * m], m, rho.begin());
    compute_duals(cost2_, y);

    // Harris two-pass ratio test on the reduced costs.
    std::vector<std::pair<int, double>> eligible_cols;
    double relaxed = kInfinity;
    double a_max = 0.0;
    double cost_scale = 1.0;
    for (double c : cost2_) cost_scale = std::max(cost_scale, std::abs(c));
    const double dual_tol = kOptimalityTol * cost_scale;
    for (int j = 0; j < total_; ++j) {
      const VarStatus s = status_[j];
      if (s == VarStatus::kBasic || lo_[j] == up_[j]) continue;
      double a = 0.0;
      if (j < n_) {
        for (auto [i, v] : columns_[j]) a += rho[i] * v;
      } else if (j < n_ + m_) {
        a = rho[j - n_];
      } else {
        a = rho[j - n_ - m_] * art_sign_[j - n_ - m_];
      }
      if (std::abs(a) <= kPivotTol) continue;
      // x_leave moves by -a per unit increase of x_j.
      bool eligible;
      if (s == VarStatus::kAtLower) eligible = to_lower ? a < 0.0 : a > 0.0;
      else if (s == VarStatus::kAtUpper) eligible = to_lower ? a > 0.0 : a < 0.0;
      else eligible = true;
      if (!eligible) continue;
      eligible_cols.emplace_back(j, a);
      a_max = std::max(a_max, std::abs(a));
    }
    const double pivot_tol = kRelativePivotTol * a_max;
    std::erase_if(eligible_cols, [&](const auto& c) { return std::abs(c.second) <= pivot_tol; });
    for (auto [j, a] : eligible_cols) {
      relaxed = std::min(relaxed, (std::abs(reduced_cost(j, cost2_, y)) + dual_tol) / std::abs(a));
    }
    int enter = -1;
    double best_ratio = kInfinity;
    double best_abs = 0.0;
    for (auto [j, a] : eligible_cols) {
      const double ratio = std::abs(reduced_cost(j, cost2_, y)) / std::abs(a);
      if (ratio > relaxed) continue;
      bool take;
      if (enter < 0) take = true;
      else if (bland) take = j < enter;
      else take = std::abs(a) > best_abs;
      if (take) {
        best_ratio = ratio;
        best_abs = std::abs(a);
        enter = j;
      }
    }
    if (enter < 0) return LpOutcome::kInfeasible;

    if (best_ratio <= kStepTol) {
      if (++stall > kStallLimit) bland = true;
    } else {
      stall = 0;
      bland = false;
    }

    column_times_binv(enter, alpha);
    const double target = to_lower ? lo_[leave] : up_[leave];
    const double delta = (x_[leave] - target) / alpha[leave_row];
    x_[enter] += delta;
    for (int k = 0; k < m_; ++k) x_[head_[k]] -= alpha[k] * delta;
    x_[leave] = target;
    status_[leave] = to_lower ? VarStatus::kAtLower : VarStatus::kAtUpper;
    row_of_[leave] = -1;
    head_[leave_row] = enter;
    row_of_[enter] = leave_row;
    status_[enter] = VarStatus::kBasic;
    pivot(leave_row, alpha);
  }
}

bool SimplexEngine::make_dual_feasible() {
  std::vector<double> y;
  compute_duals(cost2_, y);
  double cost_scale = 1.0;
  for (double c : cost2_) cost_scale = std::max(cost_scale, std::abs(c));
  const double tol = kOptimalityTol * cost_scale;
  for (int j = 0; j < total_; ++j) {
    if (status_[j] == VarStatus::kBasic) continue;
    place_nonbasic(j);
    if (lo_[j] == up_[j]) continue;
    const double d = reduced_cost(j, cost2_, y);
    if (d < -tol) {
      if (!finite(up_[j])) return false;
      status_[j] = VarStatus::kAtUpper;
      x_[j] = up_[j];
    } else if (d > tol) {
      if (!finite(lo_[j])) return false;
      status_[j] = VarStatus::kAtLower;
      x_[j] = lo_[j];
    } else if (status_[j] == VarStatus::kFreeZero) {
      // zero reduced cost: any position is dual feasible
    }
  }
  return true;
}

LpOutcome SimplexEngine::solve() {
  iteration_limit_ = iterations_ + 200LL * (n_ + m_) + 10000;
  initial_basis();

  bool needs_phase_one = false;
  for (int i = 0; i < m_; ++i) needs_phase_one |= head_[i] >= n_ + m_;
  if (needs_phase_one) {
    std::vector<double> cost1(total_, 0.0);
    for (int i = 0; i < m_; ++i) {
      if (up_[n_ + m_ + i] > 0.0) cost1[n_ + m_ + i] = 1.0;
    }
    primal_loop(cost1);
    if (!refactor()) throw std::runtime_error("simplex: singular basis after phase one");
    compute_basic_values();
    double infeasibility = 0.0;
    double scale = 1.0;
    for (int i = 0; i < m_; ++i) {
      infeasibility += x_[n_ + m_ + i] * cost1[n_ + m_ + i];
      scale = std::max(scale, std::abs(rhs_[i]));
    }
    if (infeasibility > kFeasibilityTol * scale) return LpOutcome::kInfeasible;
    for (int i = 0; i < m_; ++i) {
      const int art = n_ + m_ + i;
      lo_[art] = up_[art] = 0.0;
      if (status_[art] != VarStatus::kBasic) {
        status_[art] = VarStatus::kAtLower;
        x_[art] = 0.0;
      }
    }
  }
  LpOutcome outcome = primal_loop(cost2_);
  if (outcome != LpOutcome::kOptimal) return outcome;
  if (!refactor()) throw std::runtime_error("simplex: singular final basis");
  compute_basic_values();
  outcome = dual_loop();
  if (outcome != LpOutcome::kOptimal) return outcome;
  return primal_loop(cost2_);
}

LpOutcome SimplexEngine::resolve(const std::vector<double>& lower, const std::vector<double>& upper) {
  set_structural_bounds(lower, upper);
  for (int i = 0; i < m_; ++i) lo_[n_ + m_ + i] = up_[n_ + m_ + i] = 0.0;
  iteration_limit_ = iterations_ + 200LL * (n_ + m_) + 10000;
  if (!factor_valid_ && !refactor()) return solve();
  if (!make_dual_feasible()) return solve();
  compute_basic_values();
  LpOutcome outcome = dual_loop();
  if (outcome != LpOutcome::kOptimal) return outcome;
  return primal_loop(cost2_);
}

LpOutcome SimplexEngine::resolve_from(const Basis& basis, const std::vector<double>& lower,
                                      const std::vector<double>& upper) {
  head_ = basis.head;
  status_ = basis.status;
  std::fill(row_of_.begin(), row_of_.end(), -1);
  for (int k = 0; k < m_; ++k) row_of_[head_[k]] = k;
  if (!refactor()) {
    set_structural_bounds(lower, upper);
    return solve();
  }
  return resolve(lower, upper);
}

double SimplexEngine::objective() const {
  double v = objective_constant_;
  for (int j = 0; j < n_; ++j) v -= cost2_[j] * x_[j];
  return v;
}

std::vector<double> SimplexEngine::primal() const {
  std::vector<double> x(x_.begin(), x_.begin() + n_);
  for (int j = 0; j < n_; ++j) x[j] *= col_scale_[j];
  return x;
}

}  // namespace h2chain::milp::detail
