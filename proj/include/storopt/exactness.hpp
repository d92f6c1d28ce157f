#pragma once

// A-priori tests deciding whether the LP relaxation of the storage
// scheduling problem (charge/discharge exclusivity dropped) has an optimum
// that is physically feasible, and the advisor that chains them.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "storopt/price_partition.hpp"
#include "storopt/storage_model.hpp"

namespace storopt {

enum class SpecialCase {
  ExactAllOptima,               // no negative/zero price and lossy round trip
  ExactSomeOptimumPerfectEta,   // lossless round trip
  ExactSomeOptimumNoNegPrices,  // no strictly negative price
  Inconclusive,
};

/// Checks the three classical exactness cases in order.
SpecialCase classify_special_cases(const StorageParams& params, const PricePartition& part);

enum class NetExchange { NetChargeMax, NetDischargeMax, ScdOptimal };

struct NetExchangeVerdict {
  std::size_t t = 0;
  double beta = 0.0;  // s_t - rho * s_{t-1}
  NetExchange kind = NetExchange::ScdOptimal;
};

/// A-posteriori classification of a negative-price period of an LP optimum.
/// At such a period SCD is avoidable only when the optimum moves the full
/// one-period charge or discharge; anything in between forces SCD.
/// Throws NotNegativePrice when C_t >= 0.
NetExchangeVerdict classify_net_exchange(const StorageParams& params, const PriceSeries& prices,
                                         const Schedule& schedule, std::size_t t,
                                         double tol = kDefaultTolerance);

/// The store overshoots s_max with one full-rate charge from s_min and
/// undershoots s_min with one full-rate discharge from s_max. Under losses
/// and a negative price this makes every LP optimum exhibit SCD.
bool single_period_swing_inexact(const StorageParams& params);

/// The store fills up from s_min in fewer periods than the longest run of
/// negative prices. Throws NoNegativePrices when there is no such run.
bool longest_run_overfills(const StorageParams& params, const PricePartition& part);

/// Starting level plus a split of the longest negative run into full-rate
/// charge and full-rate discharge periods that lands exactly on s_max.
struct BalanceWitness {
  double s = 0.0;
  std::vector<std::size_t> charge_set;     // 0-based periods
  std::vector<std::size_t> discharge_set;  // 0-based periods
};

enum class WitnessSearch { Found, Absent, Unknown };

struct BalanceSearchResult {
  WitnessSearch status = WitnessSearch::Absent;
  std::optional<BalanceWitness> witness;
};

/// Largest run length enumerated exhaustively when rho < 1.
inline constexpr std::size_t kMaxEnumeratedRun = 22;
/// Tolerance for matching a fixed starting level.
inline constexpr double kBalanceTolerance = 1e-9;

/// Searches for a BalanceWitness. With `s_fixed` the starting level is pinned;
/// otherwise any level in [s_min, s_max] is accepted. With rho == 1 only the
/// number of charge periods matters and the smallest count wins (charge set =
/// first k periods). With rho < 1 subsets are enumerated in increasing
/// bitmask order (bit i = period first + i), up to kMaxEnumeratedRun periods;
/// longer runs return Unknown. Throws NoNegativePrices.
BalanceSearchResult longest_run_balance_witness(const StorageParams& params,
                                                const PricePartition& part,
                                                std::optional<double> s_fixed = std::nullopt);

/// True for a single negative run that the store can absorb at full charge
/// after discharging as much as possible beforehand.
bool single_block_headroom(const StorageParams& params, const PricePartition& part);

/// Worst-case level after each block: discharge at full rate through the
/// positive run (floored at s_min), then charge at full rate through the
/// negative run. Values stop at the first overshoot of s_max.
struct HeadroomSequence {
  std::vector<double> values;
  std::optional<std::size_t> first_violation;  // 0-based block index

  bool exact() const noexcept { return !first_violation.has_value(); }
};

/// Throws AssumptionViolated when leakage cannot be recovered in one period.
HeadroomSequence block_headroom_sequence(const StorageParams& params, const PricePartition& part);

enum class Recommendation { SolveLP, SolveRefinedMilp };

struct RuleOutcome {
  std::string rule;
  bool fired = false;
  std::string detail;
};

struct Advice {
  Recommendation recommendation = Recommendation::SolveRefinedMilp;
  std::vector<RuleOutcome> rationale;
};

/// Walks the decision procedure: classical exact cases, single-period swing,
/// terminal-level request, longest-run overfill, then single-block headroom or
/// the block headroom recurrence. Every evaluated rule is recorded in order.
Advice advise(const StorageParams& params, const PricePartition& part,
              bool final_level_constrained = false);

const char* to_string(SpecialCase value);
const char* to_string(NetExchange value);
const char* to_string(Recommendation value);

}  // namespace storopt
