#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "storopt/price_partition.hpp"

namespace storopt {

/// Default feasibility / SCD tolerance, in the unit of the checked quantity.
inline constexpr double kDefaultTolerance = 1e-7;

/// Physical description of a storage unit. Energies in MWh, powers in MW,
/// dt in hours.
struct StorageParams {
  double s_min = 0.0;
  double s_max = 1.0;
  double s_init = 0.0;
  double p_chg_max = 1.0;
  double p_dis_max = 1.0;
  double eta_c = 1.0;
  double eta_d = 1.0;
  double rho = 1.0;  // per-period retention after self-discharge
  double dt = 1.0;

  double round_trip() const noexcept { return eta_c * eta_d; }
  bool lossless() const noexcept { return eta_c == 1.0 && eta_d == 1.0; }
  double capacity() const noexcept { return s_max - s_min; }
  /// Largest SoE increase in one period, eta_c * P^C * dt.
  double max_net_charge() const noexcept { return dt * eta_c * p_chg_max; }
  /// Largest SoE decrease in one period, P^D * dt / eta_d.
  double max_net_discharge() const noexcept { return dt * p_dis_max / eta_d; }

  /// Throws InvalidArgument describing the first broken invariant.
  void validate() const;
};

struct Schedule {
  std::vector<double> p_chg;
  std::vector<double> p_dis;
  std::vector<double> soe;  // end-of-period SoE; s_0 = s_init is implicit

  std::size_t size() const noexcept { return soe.size(); }
  /// Throws InvalidArgument unless all three sequences share a length >= 1.
  void validate_shape() const;
};

struct Violation {
  std::size_t t = 0;
  std::string tag;  // bound_pc, bound_pd, bound_soe, soe_recursion
  double magnitude = 0.0;
};

struct FeasibilityReport {
  bool feasible = true;
  std::vector<Violation> violations;
};

/// A period with both charge and discharge above tolerance.
struct ScdEvent {
  std::size_t t = 0;
  double p_chg = 0.0;
  double p_dis = 0.0;
};

/// Iterates s_t = rho * s_{t-1} + dt * (eta_c * p^C_t - p^D_t / eta_d) from s_init.
std::vector<double> propagate_soe(const StorageParams& params, std::span<const double> p_chg,
                                  std::span<const double> p_dis);

/// Closed form of the SoE recursion: SoE at the end of period `last` given
/// `s_before`, the SoE just before period `first`. Requires first <= last + 1;
/// an empty range returns s_before.
double soe_between(const StorageParams& params, std::span<const double> p_chg,
                   std::span<const double> p_dis, std::size_t first, std::size_t last,
                   double s_before);

/// Profit sum_t dt * C_t * (p^D_t - p^C_t), in EUR.
double objective(std::span<const double> prices, const Schedule& schedule, double dt);
inline double objective(const PriceSeries& prices, const Schedule& schedule) {
  return objective(prices.prices, schedule, prices.dt);
}

FeasibilityReport feasibility_check(const StorageParams& params, const Schedule& schedule,
                                    double tol = kDefaultTolerance);

std::vector<ScdEvent> detect_scd(const Schedule& schedule, double tol = kDefaultTolerance);

/// Time to fill from s_min at full charge rate, ignoring leakage.
double duration_of_charge(const StorageParams& params);
/// Time to empty from s_max at full discharge rate, ignoring leakage.
double duration_of_discharge(const StorageParams& params);

/// True when one period of full-rate charging recovers a full store's leakage.
bool check_assumption_leakage(const StorageParams& params);

/// Net SoE change over period t, s_t - rho * s_{t-1}, read from the stored SoE.
double net_exchange(const StorageParams& params, const Schedule& schedule, std::size_t t);

/// Splits every SCD period into a single-mode action with the same net
/// exchange. Leaves the SoE trajectory untouched. Only valid where the price
/// is exactly zero or the round trip is lossless; throws RepairNotApplicable
/// otherwise.
Schedule repair_scd(const StorageParams& params, const PriceSeries& prices,
                    const Schedule& schedule, double tol = kDefaultTolerance);

/// True when an SCD at t can be removed without changing the objective.
bool scd_repairable(const StorageParams& params, const PriceSeries& prices, std::size_t t);

}  // namespace storopt
