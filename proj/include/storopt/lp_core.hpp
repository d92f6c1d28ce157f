#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <vector>

#include "storopt/price_partition.hpp"
#include "storopt/storage_model.hpp"

namespace storopt {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

struct SparseEntry {
  std::size_t col = 0;
  double value = 0.0;
};

struct LinearRow {
  std::vector<SparseEntry> entries;
  double rhs = 0.0;
};

/// maximize c'x  s.t.  A x = b,  lower <= x <= upper.
/// Lower bounds must be finite; upper bounds may be +inf.
struct LpProblem {
  std::vector<double> objective;
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<LinearRow> rows;

  std::size_t num_vars() const noexcept { return objective.size(); }
  std::size_t num_rows() const noexcept { return rows.size(); }
  void validate() const;
};

enum class LpStatus { Optimal, Infeasible, Unbounded, IterationLimit };

struct LpOptions {
  double feasibility_tol = 1e-9;
  double optimality_tol = 1e-9;
  double pivot_tol = 1e-9;
  std::size_t refactor_interval = 64;
  std::size_t max_iterations = 0;  // 0 selects 50 * (n + m) + 1000
};

/// Final basis of a solve, reusable as a warm start for the same rows with
/// different variable bounds. Columns past num_vars() are the artificials.
struct LpBasis {
  enum State : unsigned char { Basic, AtLower, AtUpper };
  std::vector<std::size_t> head;        // basic column of each row
  std::vector<State> state;             // per column, artificials included
  std::vector<double> artificial_sign;  // +1 or -1 per row
  std::vector<double> inverse;          // optional row-major basis inverse
  bool empty() const noexcept { return head.empty(); }
};

/// Primal point plus duals in the convention
///   c_j - sum_i y_i a_ij = reduced_cost_j
/// where reduced_cost_j > 0 only at an upper bound and < 0 only at a lower
/// bound when the solution is optimal. Basic variables report exactly 0.
struct LpSolution {
  LpStatus status = LpStatus::Infeasible;
  double objective = 0.0;
  std::vector<double> x;
  std::vector<double> row_duals;
  std::vector<double> reduced_costs;
  std::size_t iterations = 0;
  LpBasis basis;  // filled when Optimal
};

/// Dense bounded-variable primal simplex, two phases, Dantzig pricing with a
/// switch to Bland's rule after 5 * (n + m) iterations without progress.
LpSolution solve_lp(const LpProblem& problem, const LpOptions& options = {});

/// Starts from `warm` when it is dual feasible for `problem` (typically the
/// optimal basis of a problem that differed only in bounds) and restores
/// primal feasibility with the bounded dual simplex. Falls back to a cold
/// solve when the basis is unusable.
LpSolution solve_lp(const LpProblem& problem, const LpOptions& options, const LpBasis& warm);

/// Column layout of the storage LP: [p^C_0..p^C_{T-1}, p^D_0.., s_0..].
struct StorageLayout {
  std::size_t periods = 0;

  std::size_t p_chg(std::size_t t) const noexcept { return t; }
  std::size_t p_dis(std::size_t t) const noexcept { return periods + t; }
  std::size_t soe(std::size_t t) const noexcept { return 2 * periods + t; }
  std::size_t num_vars() const noexcept { return 3 * periods; }
};

/// The storage relaxation: one balance row per period and box bounds on
/// every power and SoE variable.
LpProblem build_lp(const StorageParams& params, const PriceSeries& prices);

/// Multipliers of the storage LP. All bound multipliers are >= 0.
struct DualVector {
  std::vector<double> lambda;  // balance rows
  std::vector<double> sigma_lo, sigma_hi;
  std::vector<double> gamma_lo, gamma_hi;
  std::vector<double> delta_lo, delta_hi;
};

enum class SolveStatus { Optimal, Infeasible, Unbounded };

struct SolveReport {
  SolveStatus status = SolveStatus::Infeasible;
  double objective = 0.0;
  Schedule schedule;
  std::optional<DualVector> duals;
  std::vector<ScdEvent> scd_events;
  std::optional<double> kkt_max_residual;
};

Schedule extract_schedule(const StorageLayout& layout, const std::vector<double>& x);

/// Solves the storage LP and fills duals, SCD events and the KKT residual.
SolveReport solve_storage_lp(const StorageParams& params, const PriceSeries& prices,
                             double tol = kDefaultTolerance);

struct KktResiduals {
  double stationarity = 0.0;     // d/dp^D, d/dp^C, d/ds rows
  double primal = 0.0;           // balance rows
  double complementarity = 0.0;  // bound pairs, natural residual |min(g, mu)|
  double scd_identity = 0.0;     // dt*C*(1-eta) + eta*delta_hi + gamma_hi at SCD periods
  double max() const noexcept;
};

/// Evaluates the optimality system of the storage LP on a report.
/// Throws MissingDuals when the report has none.
KktResiduals kkt_residuals(const StorageParams& params, const PriceSeries& prices,
                           const SolveReport& report, double tol = kDefaultTolerance);

inline double kkt_verify(const StorageParams& params, const PriceSeries& prices,
                         const SolveReport& report, double tol = kDefaultTolerance) {
  return kkt_residuals(params, prices, report, tol).max();
}

/// Value of the LP dual objective at the report's multipliers.
double dual_objective(const StorageParams& params, const PriceSeries& prices,
                      const DualVector& duals);

const char* to_string(LpStatus value);
const char* to_string(SolveStatus value);

}  // namespace storopt
