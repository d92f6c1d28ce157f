#pragma once

#include <cstddef>

#include "storopt/lp_core.hpp"
#include "storopt/price_partition.hpp"
#include "storopt/storage_model.hpp"

namespace storopt {

struct DpConfig {
  std::size_t grid_points = 801;
  std::size_t action_levels = 101;

  void validate() const;
};

/// Backward dynamic programming over an evenly spaced SoE grid spanning
/// [s_min, s_max]. Each step moves between grid levels (the first step starts
/// from s_init) with the single action, charge or discharge, that realises
/// the level change exactly, so the reconstructed schedule is feasible and
/// never charges and discharges at once. The objective is recomputed on that
/// schedule. Doubling (grid_points - 1) nests grids, so the value never
/// decreases along such a ladder.
///
/// Throws GridTooCoarse when a full-rate charge moves less than one grid step.
SolveReport solve_dp(const StorageParams& params, const PriceSeries& prices,
                     const DpConfig& config = {});

inline constexpr std::size_t kMicroMaxPeriods = 4;
inline constexpr std::size_t kMicroMaxLevels = 7;

/// Enumerates every idle / charge / discharge choice per period with powers
/// k * P / (levels - 1), k = 1..levels-1, keeps feasible trajectories and
/// returns the best profit (-inf when none is feasible).
/// Throws HorizonTooLong above kMicroMaxPeriods periods.
double exhaustive_micro_oracle(const StorageParams& params, const PriceSeries& prices,
                               std::size_t levels);

}  // namespace storopt
