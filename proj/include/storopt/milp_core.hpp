#pragma once

#include <cstddef>
#include <vector>

#include "storopt/lp_core.hpp"
#include "storopt/price_partition.hpp"
#include "storopt/storage_model.hpp"

namespace storopt {

/// Storage problem with exclusivity binaries on a subset of periods.
///
/// For every binary period t the base LP carries u^C_t, u^D_t in [0, 1] and
/// three rows
///   p^C_t - P^C u^C_t + slack = 0
///   p^D_t - P^D u^D_t + slack = 0
///   u^C_t + u^D_t + slack = 1
/// The full model puts binaries on every period; the refined model only on
/// strictly negative-price periods.
struct MilpProblem {
  StorageParams params;
  PriceSeries prices;
  StorageLayout layout;
  LpProblem base;
  bool refined = false;
  std::vector<std::size_t> binary_periods;
  std::vector<std::size_t> u_chg;  // column of u^C for binary_periods[k]
  std::vector<std::size_t> u_dis;

  std::size_t binary_count() const noexcept { return 2 * binary_periods.size(); }
};

MilpProblem build_milp(const StorageParams& params, const PriceSeries& prices, bool refined,
                       const PricePartition& part);

struct BnbStats {
  std::size_t nodes = 0;
  std::size_t incumbent_updates = 0;
  double gap = 0.0;
};

struct MilpResult {
  SolveReport report;
  BnbStats stats;
};

/// Depth-first branch-and-bound on the exclusivity binaries. A node whose LP
/// optimum has no SCD outside repairable periods is MILP-feasible and becomes
/// an incumbent after repair_scd. Otherwise the node branches on the SCD
/// period with the largest min(p^C/P^C, p^D/P^D), lowest price first,
/// into a charge-only child and a discharge-only child.
MilpResult solve_milp(const MilpProblem& problem, double tol = kDefaultTolerance);

}  // namespace storopt
