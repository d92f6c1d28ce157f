#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include "storopt/errors.hpp"
#include "storopt/lp_core.hpp"

namespace storopt {

namespace {

using VarState = LpBasis::State;

class BoundedSimplex {
 public:
  BoundedSimplex(const LpProblem& problem, const LpOptions& options)
      : m_(problem.num_rows()), n_(problem.num_vars()), options_(options) {
    const std::size_t total = n_ + m_;
    cols_.resize(total);
    for (std::size_t i = 0; i < m_; ++i) {
      for (const SparseEntry& e : problem.rows[i].entries) {
        if (e.value != 0.0) cols_[e.col].push_back({i, e.value});
      }
      b_.push_back(problem.rows[i].rhs);
    }
    lo_ = problem.lower;
    up_ = problem.upper;
    lo_.resize(total, 0.0);
    up_.resize(total, kInfinity);
    objective_ = problem.objective;
    objective_.resize(total, 0.0);
    x_.assign(total, 0.0);
    state_.assign(total, VarState::AtLower);
    head_.assign(m_, 0);
    cost_.assign(total, 0.0);
    limit_ = options.max_iterations ? options.max_iterations : 50 * (n_ + m_) + 1000;
  }

  LpSolution run() {
    LpSolution sol;
    const bool needs_phase1 = crash();
    if (!refactor()) throw InternalError("simplex: singular starting basis");

    if (needs_phase1) {
      for (std::size_t j = n_; j < n_ + m_; ++j) cost_[j] = -1.0;
      const LpStatus st = iterate();
      if (st == LpStatus::IterationLimit) {
        finish(sol, st);
        return sol;
      }
      double infeasibility = 0.0;
      double scale = 1.0;
      for (double v : b_) scale = std::max(scale, std::abs(v));
      for (std::size_t j = n_; j < n_ + m_; ++j) infeasibility += std::abs(x_[j]);
      if (infeasibility > 1e-7 * scale) {
        finish(sol, LpStatus::Infeasible);
        return sol;
      }
      drive_out_artificials();
    }
    for (std::size_t j = n_; j < n_ + m_; ++j) {
      lo_[j] = 0.0;
      up_[j] = 0.0;
      if (state_[j] != VarState::Basic) {
        state_[j] = VarState::AtLower;
        x_[j] = 0.0;
      }
    }
    std::copy(objective_.begin(), objective_.end(), cost_.begin());
    if (!refactor()) throw InternalError("simplex: singular basis after phase one");
    finish(sol, iterate());
    return sol;
  }

  // Returns nullopt when the warm basis cannot be used or the dual phase
  // ends ambiguously; the caller then solves from scratch.
  std::optional<LpSolution> run_warm(const LpBasis& warm) {
    if (!load(warm)) return std::nullopt;
    const std::optional<LpStatus> dual = dual_iterate();
    if (!dual || *dual == LpStatus::IterationLimit) return std::nullopt;
    LpSolution sol;
    if (*dual == LpStatus::Infeasible) {
      finish(sol, LpStatus::Infeasible);
      return sol;
    }
    finish(sol, iterate());
    return sol;
  }

 private:
  struct Nz {
    std::size_t row;
    double value;
  };

  // Starts from all structurals at their lower bound and makes one column
  // basic per row: a singleton structural when its value fits, otherwise an
  // artificial. Returns true when some artificial carries a nonzero value.
  bool crash() {
    std::vector<double> r = b_;
    for (std::size_t j = 0; j < n_; ++j) {
      x_[j] = lo_[j];
      for (const Nz& e : cols_[j]) r[e.row] -= e.value * x_[j];
    }
    std::vector<bool> used(n_, false);
    bool artificial_needed = false;
    for (std::size_t i = 0; i < m_; ++i) {
      bool placed = false;
      for (std::size_t j = 0; j < n_ && !placed; ++j) {
        if (used[j] || cols_[j].size() != 1 || cols_[j][0].row != i || !(lo_[j] < up_[j]))
          continue;
        const double v = x_[j] + r[i] / cols_[j][0].value;
        if (v >= lo_[j] && v <= up_[j]) {
          x_[j] = v;
          used[j] = true;
          state_[j] = VarState::Basic;
          head_[i] = j;
          placed = true;
        }
      }
      const std::size_t a = n_ + i;
      cols_[a] = {{i, r[i] < 0.0 ? -1.0 : 1.0}};
      if (placed) {
        x_[a] = 0.0;
        state_[a] = VarState::AtLower;
      } else {
        x_[a] = std::abs(r[i]);
        state_[a] = VarState::Basic;
        head_[i] = a;
        if (x_[a] != 0.0) artificial_needed = true;
      }
    }
    return artificial_needed;
  }

  // Installs a previous basis. Nonbasic columns sit on the bound named by
  // their state; a column on the wrong side of its reduced cost is moved to
  // the other bound when that bound is finite.
  bool load(const LpBasis& warm) {
    const std::size_t total = n_ + m_;
    if (warm.head.size() != m_ || warm.state.size() != total || warm.artificial_sign.size() != m_)
      return false;
    std::size_t basic = 0;
    for (std::size_t j = 0; j < total; ++j) basic += warm.state[j] == VarState::Basic;
    if (basic != m_) return false;
    for (std::size_t i = 0; i < m_; ++i) {
      if (warm.head[i] >= total || warm.state[warm.head[i]] != VarState::Basic) return false;
      cols_[n_ + i] = {{i, warm.artificial_sign[i]}};
      lo_[n_ + i] = up_[n_ + i] = 0.0;
    }
    head_ = warm.head;
    state_ = warm.state;
    auto place = [this](std::size_t j) {
      if (state_[j] == VarState::AtUpper && up_[j] == kInfinity) state_[j] = VarState::AtLower;
      x_[j] = state_[j] == VarState::AtLower ? lo_[j] : up_[j];
    };
    for (std::size_t j = 0; j < total; ++j)
      if (state_[j] != VarState::Basic) place(j);
    std::copy(objective_.begin(), objective_.end(), cost_.begin());
    if (warm.inverse.size() == m_ * m_) {
      binv_ = warm.inverse;
      recompute_basic();
    } else if (!refactor()) {
      return false;
    }
    compute_duals();
    bool moved = false;
    for (std::size_t j = 0; j < total; ++j) {
      if (state_[j] == VarState::Basic || !(lo_[j] < up_[j])) continue;
      const double tol = options_.optimality_tol;
      if (state_[j] == VarState::AtLower && d_[j] > tol) {
        if (up_[j] == kInfinity) return false;
        state_[j] = VarState::AtUpper;
      } else if (state_[j] == VarState::AtUpper && d_[j] < -tol) {
        state_[j] = VarState::AtLower;
      } else {
        continue;
      }
      place(j);
      moved = true;
    }
    if (moved) recompute_basic();
    return true;
  }

  // Bounded dual simplex: keeps reduced costs dual feasible and pivots out
  // the most infeasible basic variable until the basis is primal feasible.
  // Returns nullopt when a row stays slightly infeasible with no pivot.
  std::optional<LpStatus> dual_iterate() {
    const double ftol = options_.feasibility_tol;
    const double ptol = options_.pivot_tol;
    const double otol = options_.optimality_tol;
    std::size_t since_refactor = 0;
    std::vector<std::pair<std::size_t, double>> candidates;
    while (true) {
      std::optional<std::size_t> leave;
      double worst = ftol;
      for (std::size_t i = 0; i < m_; ++i) {
        const std::size_t v = head_[i];
        const double infeasibility = std::max(lo_[v] - x_[v], x_[v] - up_[v]);
        if (infeasibility > worst) {
          worst = infeasibility;
          leave = i;
        }
      }
      if (!leave) return LpStatus::Optimal;
      if (iterations_ >= limit_) return LpStatus::IterationLimit;
      ++iterations_;

      const std::size_t r = *leave;
      const std::size_t v = head_[r];
      const bool below = x_[v] < lo_[v];
      const double* rho = &binv_[r * m_];
      candidates.clear();
      double bound = kInfinity;
      for (std::size_t j = 0; j < n_ + m_; ++j) {
        if (state_[j] == VarState::Basic || !(lo_[j] < up_[j])) continue;
        double a = 0.0;
        for (const Nz& e : cols_[j]) a += rho[e.row] * e.value;
        const bool at_lower = state_[j] == VarState::AtLower;
        const bool ok = below ? (at_lower ? a < -ptol : a > ptol) : (at_lower ? a > ptol : a < -ptol);
        if (!ok) continue;
        candidates.emplace_back(j, a);
        bound = std::min(bound, (std::abs(d_[j]) + otol) / std::abs(a));
      }
      if (candidates.empty()) {
        if (worst < 1e-6) return std::nullopt;
        return LpStatus::Infeasible;
      }
      std::size_t q = candidates.front().first;
      double best_pivot = 0.0;
      for (const auto& [j, a] : candidates) {
        if (std::abs(d_[j]) / std::abs(a) <= bound && std::abs(a) > best_pivot) {
          best_pivot = std::abs(a);
          q = j;
        }
      }

      const std::vector<double> alpha = ftran(q);
      const double target = below ? lo_[v] : up_[v];
      const double delta = (x_[v] - target) / alpha[r];
      x_[q] += delta;
      for (std::size_t i = 0; i < m_; ++i) x_[head_[i]] -= alpha[i] * delta;
      x_[v] = target;
      state_[v] = below ? VarState::AtLower : VarState::AtUpper;
      pivot(r, alpha);
      head_[r] = q;
      state_[q] = VarState::Basic;

      if (++since_refactor >= options_.refactor_interval) {
        if (!refactor()) return std::nullopt;
        since_refactor = 0;
      }
      compute_duals();
    }
  }

  // Rebuilds the basis inverse by Gauss-Jordan elimination and recomputes
  // the basic values from the nonbasic ones.
  bool refactor() {
    std::vector<double> mat(m_ * m_, 0.0);
    for (std::size_t k = 0; k < m_; ++k)
      for (const Nz& e : cols_[head_[k]]) mat[e.row * m_ + k] = e.value;
    binv_.assign(m_ * m_, 0.0);
    for (std::size_t i = 0; i < m_; ++i) binv_[i * m_ + i] = 1.0;
    std::vector<std::size_t> mat_nz, inv_nz;
    for (std::size_t c = 0; c < m_; ++c) {
      std::size_t piv = c;
      for (std::size_t i = c + 1; i < m_; ++i)
        if (std::abs(mat[i * m_ + c]) > std::abs(mat[piv * m_ + c])) piv = i;
      if (std::abs(mat[piv * m_ + c]) < 1e-12) return false;
      if (piv != c) {
        for (std::size_t k = 0; k < m_; ++k) {
          std::swap(mat[piv * m_ + k], mat[c * m_ + k]);
          std::swap(binv_[piv * m_ + k], binv_[c * m_ + k]);
        }
      }
      const double inv = 1.0 / mat[c * m_ + c];
      // The basis is sparse, so eliminate with the pivot row's nonzeros only.
      mat_nz.clear();
      inv_nz.clear();
      for (std::size_t k = c; k < m_; ++k) {
        if (mat[c * m_ + k] == 0.0) continue;
        mat[c * m_ + k] *= inv;
        mat_nz.push_back(k);
      }
      for (std::size_t k = 0; k < m_; ++k) {
        if (binv_[c * m_ + k] == 0.0) continue;
        binv_[c * m_ + k] *= inv;
        inv_nz.push_back(k);
      }
      for (std::size_t i = 0; i < m_; ++i) {
        const double f = mat[i * m_ + c];
        if (i == c || f == 0.0) continue;
        for (std::size_t k : mat_nz) mat[i * m_ + k] -= f * mat[c * m_ + k];
        for (std::size_t k : inv_nz) binv_[i * m_ + k] -= f * binv_[c * m_ + k];
      }
    }
    recompute_basic();
    return true;
  }

  // x_B = B^-1 (b - N x_N) with the current inverse.
  void recompute_basic() {
    std::vector<double> r = b_;
    for (std::size_t j = 0; j < n_ + m_; ++j) {
      if (state_[j] == VarState::Basic || x_[j] == 0.0) continue;
      for (const Nz& e : cols_[j]) r[e.row] -= e.value * x_[j];
    }
    for (std::size_t i = 0; i < m_; ++i) {
      double v = 0.0;
      for (std::size_t k = 0; k < m_; ++k) v += binv_[i * m_ + k] * r[k];
      x_[head_[i]] = v;
    }
    fresh_ = true;
  }

  void compute_duals() {
    y_.assign(m_, 0.0);
    for (std::size_t i = 0; i < m_; ++i) {
      const double c = cost_[head_[i]];
      if (c == 0.0) continue;
      for (std::size_t k = 0; k < m_; ++k) y_[k] += c * binv_[i * m_ + k];
    }
    d_.assign(n_ + m_, 0.0);
    for (std::size_t j = 0; j < n_ + m_; ++j) {
      if (state_[j] == VarState::Basic) continue;
      double v = cost_[j];
      for (const Nz& e : cols_[j]) v -= y_[e.row] * e.value;
      d_[j] = v;
    }
  }

  std::vector<double> ftran(std::size_t j) const {
    std::vector<double> alpha(m_, 0.0);
    for (const Nz& e : cols_[j])
      for (std::size_t i = 0; i < m_; ++i) alpha[i] += binv_[i * m_ + e.row] * e.value;
    return alpha;
  }

  void pivot(std::size_t r, const std::vector<double>& alpha) {
    fresh_ = false;
    const double inv = 1.0 / alpha[r];
    double* row_r = &binv_[r * m_];
    for (std::size_t k = 0; k < m_; ++k) row_r[k] *= inv;
    for (std::size_t i = 0; i < m_; ++i) {
      if (i == r || alpha[i] == 0.0) continue;
      const double f = alpha[i];
      double* row_i = &binv_[i * m_];
      for (std::size_t k = 0; k < m_; ++k) row_i[k] -= f * row_r[k];
    }
  }

  bool eligible(std::size_t j) const {
    if (state_[j] == VarState::Basic || !(lo_[j] < up_[j])) return false;
    const double tol = options_.optimality_tol;
    return (state_[j] == VarState::AtLower && d_[j] > tol) ||
           (state_[j] == VarState::AtUpper && d_[j] < -tol);
  }

  std::optional<std::size_t> choose_entering(bool bland) const {
    std::optional<std::size_t> best;
    double best_score = 0.0;
    for (std::size_t j = 0; j < n_ + m_; ++j) {
      if (!eligible(j)) continue;
      if (bland) return j;
      if (std::abs(d_[j]) > best_score) {
        best_score = std::abs(d_[j]);
        best = j;
      }
    }
    return best;
  }

  LpStatus iterate() {
    compute_duals();
    std::size_t since_refactor = 0;
    std::size_t stall = 0;
    bool bland = false;
    const std::size_t stall_limit = 5 * (n_ + m_);
    const double ptol = options_.pivot_tol;
    const double ftol = options_.feasibility_tol;

    while (true) {
      std::optional<std::size_t> entering = choose_entering(bland);
      if (!entering && since_refactor > 0) {
        if (!refactor()) throw InternalError("simplex: basis became singular");
        since_refactor = 0;
        compute_duals();
        entering = choose_entering(bland);
      }
      if (!entering) return LpStatus::Optimal;
      if (iterations_ >= limit_) return LpStatus::IterationLimit;
      ++iterations_;

      const std::size_t j = *entering;
      const double dir = state_[j] == VarState::AtLower ? 1.0 : -1.0;
      const std::vector<double> alpha = ftran(j);

      // Harris two-pass ratio test: bound the step with relaxed bounds, then
      // pick the largest pivot among rows that block within that bound.
      double relaxed = up_[j] - lo_[j];
      for (std::size_t i = 0; i < m_; ++i) {
        const double rate = -dir * alpha[i];
        const std::size_t v = head_[i];
        if (rate < -ptol)
          relaxed = std::min(relaxed, (x_[v] - lo_[v] + ftol) / -rate);
        else if (rate > ptol && up_[v] < kInfinity)
          relaxed = std::min(relaxed, (up_[v] - x_[v] + ftol) / rate);
      }
      if (relaxed == kInfinity) return LpStatus::Unbounded;

      std::optional<std::size_t> leave;
      double theta = up_[j] - lo_[j];
      double best_pivot = 0.0;
      for (std::size_t i = 0; i < m_; ++i) {
        const double rate = -dir * alpha[i];
        const std::size_t v = head_[i];
        double ratio;
        if (rate < -ptol)
          ratio = (x_[v] - lo_[v]) / -rate;
        else if (rate > ptol && up_[v] < kInfinity)
          ratio = (up_[v] - x_[v]) / rate;
        else
          continue;
        ratio = std::max(ratio, 0.0);
        if (ratio > relaxed) continue;
        bool take;
        if (bland)
          take = !leave || ratio < theta - 1e-12 ||
                 (ratio <= theta + 1e-12 && v < head_[*leave]);
        else
          take = std::abs(alpha[i]) > best_pivot;
        if (take) {
          leave = i;
          theta = ratio;
          best_pivot = std::abs(alpha[i]);
        }
      }
      if (leave && up_[j] - lo_[j] <= theta) leave.reset();
      if (!leave) theta = std::min(theta, up_[j] - lo_[j]);

      if (theta * std::abs(d_[j]) > 1e-12) {
        stall = 0;
        bland = false;
      } else if (++stall > stall_limit) {
        bland = true;
      }

      x_[j] += dir * theta;
      for (std::size_t i = 0; i < m_; ++i) x_[head_[i]] -= dir * theta * alpha[i];
      fresh_ = false;

      if (!leave) {
        state_[j] = state_[j] == VarState::AtLower ? VarState::AtUpper : VarState::AtLower;
        x_[j] = state_[j] == VarState::AtLower ? lo_[j] : up_[j];
      } else {
        const std::size_t r = *leave;
        const std::size_t v = head_[r];
        const bool to_lower = -dir * alpha[r] < 0.0;
        x_[v] = to_lower ? lo_[v] : up_[v];
        state_[v] = to_lower ? VarState::AtLower : VarState::AtUpper;
        pivot(r, alpha);
        head_[r] = j;
        state_[j] = VarState::Basic;
      }

      if (++since_refactor >= options_.refactor_interval) {
        if (!refactor()) throw InternalError("simplex: basis became singular");
        since_refactor = 0;
      }
      compute_duals();
    }
  }

  // Replaces basic artificials by structurals with a degenerate pivot. Rows
  // where none qualifies are redundant and keep their artificial at zero.
  void drive_out_artificials() {
    for (std::size_t r = 0; r < m_; ++r) {
      if (head_[r] < n_) continue;
      std::optional<std::size_t> best;
      double best_value = 1e-7;
      for (std::size_t j = 0; j < n_; ++j) {
        if (state_[j] == VarState::Basic) continue;
        double v = 0.0;
        for (const Nz& e : cols_[j]) v += binv_[r * m_ + e.row] * e.value;
        if (std::abs(v) > best_value) {
          best_value = std::abs(v);
          best = j;
        }
      }
      if (!best) continue;
      const std::size_t a = head_[r];
      const std::vector<double> alpha = ftran(*best);
      pivot(r, alpha);
      head_[r] = *best;
      state_[*best] = VarState::Basic;
      state_[a] = VarState::AtLower;
      x_[a] = 0.0;
    }
  }

  void finish(LpSolution& sol, LpStatus status) {
    sol.status = status;
    sol.iterations = iterations_;
    if (status != LpStatus::Optimal) return;
    if (!fresh_ && !refactor()) throw InternalError("simplex: singular final basis");
    compute_duals();
    sol.x.assign(x_.begin(), x_.begin() + static_cast<std::ptrdiff_t>(n_));
    for (std::size_t j = 0; j < n_; ++j) sol.x[j] = std::clamp(sol.x[j], lo_[j], up_[j]);
    sol.row_duals = y_;
    sol.reduced_costs.assign(d_.begin(), d_.begin() + static_cast<std::ptrdiff_t>(n_));
    sol.objective = 0.0;
    for (std::size_t j = 0; j < n_; ++j) sol.objective += objective_[j] * sol.x[j];
    sol.basis.head = head_;
    sol.basis.state = state_;
    sol.basis.inverse = std::move(binv_);  // last use; the solver is done
    sol.basis.artificial_sign.resize(m_);
    for (std::size_t i = 0; i < m_; ++i) sol.basis.artificial_sign[i] = cols_[n_ + i][0].value;
  }

  std::size_t m_;
  std::size_t n_;
  LpOptions options_;
  std::vector<std::vector<Nz>> cols_;
  std::vector<double> b_;
  std::vector<double> lo_, up_;
  std::vector<double> objective_;
  std::vector<double> cost_;
  std::vector<double> x_;
  std::vector<VarState> state_;
  std::vector<std::size_t> head_;
  std::vector<double> binv_;
  std::vector<double> y_, d_;
  std::size_t iterations_ = 0;
  std::size_t limit_ = 0;
  bool fresh_ = false;  // basis inverse and basic values rebuilt since the last pivot
};

}  // namespace

void LpProblem::validate() const {
  const std::size_t n = num_vars();
  if (lower.size() != n || upper.size() != n)
    throw InvalidArgument("LpProblem: bound vectors must match the objective length");
  for (std::size_t j = 0; j < n; ++j) {
    if (!std::isfinite(objective[j])) throw InvalidArgument("LpProblem: non-finite objective");
    if (!std::isfinite(lower[j]))
      throw InvalidArgument("LpProblem: lower bound of variable " + std::to_string(j) +
                            " must be finite");
    if (std::isnan(upper[j]) || upper[j] == -kInfinity || lower[j] > upper[j])
      throw InvalidArgument("LpProblem: bad bounds on variable " + std::to_string(j));
  }
  for (const LinearRow& row : rows) {
    if (!std::isfinite(row.rhs)) throw InvalidArgument("LpProblem: non-finite rhs");
    for (const SparseEntry& e : row.entries) {
      if (e.col >= n) throw InvalidArgument("LpProblem: row references a missing variable");
      if (!std::isfinite(e.value)) throw InvalidArgument("LpProblem: non-finite coefficient");
    }
  }
}

LpSolution solve_lp(const LpProblem& problem, const LpOptions& options) {
  problem.validate();
  return BoundedSimplex(problem, options).run();
}

LpSolution solve_lp(const LpProblem& problem, const LpOptions& options, const LpBasis& warm) {
  problem.validate();
  if (!warm.empty()) {
    if (std::optional<LpSolution> sol = BoundedSimplex(problem, options).run_warm(warm))
      return std::move(*sol);
  }
  return BoundedSimplex(problem, options).run();
}

const char* to_string(LpStatus value) {
  switch (value) {
    case LpStatus::Optimal: return "optimal";
    case LpStatus::Infeasible: return "infeasible";
    case LpStatus::Unbounded: return "unbounded";
    case LpStatus::IterationLimit: return "iteration_limit";
  }
  return "unknown";
}

}  // namespace storopt
