#include "storopt/exactness.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>

#include <fmt/core.h>

#include "storopt/errors.hpp"

namespace storopt {

namespace {

// sum_{t=1}^{n} rho^{n-t}, accumulated term by term so rho == 1 needs no
// special case.
double geometric_sum(double rho, std::size_t n) {
  double sum = 0.0;
  double w = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    sum += w;
    w *= rho;
  }
  return sum;
}

double power(double rho, std::size_t n) {
  double p = 1.0;
  for (std::size_t i = 0; i < n; ++i) p *= rho;
  return p;
}

// Level after p periods of full-rate discharge from `start`, floored at s_min,
// then n periods of full-rate charge.
double discharge_then_charge(const StorageParams& params, double start, std::size_t p,
                             std::size_t n) {
  const double drained = power(params.rho, p) * start -
                         params.max_net_discharge() * geometric_sum(params.rho, p);
  return power(params.rho, n) * std::max(drained, params.s_min) +
         params.max_net_charge() * geometric_sum(params.rho, n);
}

void require_negative_run(const PricePartition& part) {
  if (part.n_bar == 0 || !part.longest_neg)
    throw NoNegativePrices("price series has no strictly negative period");
}

std::string num(double v) { return fmt::format("{:.6g}", v); }

}  // namespace

SpecialCase classify_special_cases(const StorageParams& params, const PricePartition& part) {
  const bool lossy = !params.lossless();
  if (part.t_neg.empty() && part.t_zero.empty() && lossy) return SpecialCase::ExactAllOptima;
  if (!lossy) return SpecialCase::ExactSomeOptimumPerfectEta;
  if (part.t_neg.empty()) return SpecialCase::ExactSomeOptimumNoNegPrices;
  return SpecialCase::Inconclusive;
}

NetExchangeVerdict classify_net_exchange(const StorageParams& params, const PriceSeries& prices,
                                         const Schedule& schedule, std::size_t t, double tol) {
  schedule.validate_shape();
  if (prices.size() != schedule.size())
    throw InvalidArgument("classify_net_exchange: length mismatch");
  if (t >= schedule.size()) throw InvalidArgument("classify_net_exchange: period out of range");
  if (!(prices[t] < 0.0))
    throw NotNegativePrice(fmt::format("period {} has price {} >= 0", t + 1, num(prices[t])));

  NetExchangeVerdict v;
  v.t = t;
  v.beta = net_exchange(params, schedule, t);
  if (std::abs(v.beta - params.max_net_charge()) <= tol)
    v.kind = NetExchange::NetChargeMax;
  else if (std::abs(v.beta + params.max_net_discharge()) <= tol)
    v.kind = NetExchange::NetDischargeMax;
  else
    v.kind = NetExchange::ScdOptimal;
  return v;
}

bool single_period_swing_inexact(const StorageParams& params) {
  return params.rho * params.s_min + params.max_net_charge() > params.s_max &&
         params.rho * params.s_max - params.max_net_discharge() < params.s_min;
}

bool longest_run_overfills(const StorageParams& params, const PricePartition& part) {
  require_negative_run(part);
  return power(params.rho, part.n_bar) * params.s_min +
             params.max_net_charge() * geometric_sum(params.rho, part.n_bar) >
         params.s_max;
}

BalanceSearchResult longest_run_balance_witness(const StorageParams& params,
                                                const PricePartition& part,
                                                std::optional<double> s_fixed) {
  require_negative_run(part);
  const Interval run = *part.longest_neg;
  const std::size_t n = part.n_bar;
  const double a = params.max_net_charge();
  const double b = params.max_net_discharge();
  const double decay = power(params.rho, n);

  // x is the weighted count of charge periods, sum over T^C of rho^(last - t).
  auto accept = [&](double x, double total) -> std::optional<double> {
    const double inflow = (a + b) * x - b * total;
    if (s_fixed) {
      if (std::abs(decay * *s_fixed + inflow - params.s_max) <= kBalanceTolerance) return *s_fixed;
      return std::nullopt;
    }
    const double s = (params.s_max - inflow) / decay;
    if (s >= params.s_min - kBalanceTolerance && s <= params.s_max + kBalanceTolerance)
      return std::clamp(s, params.s_min, params.s_max);
    return std::nullopt;
  };

  auto make_witness = [&](double s, auto in_charge) {
    BalanceWitness w;
    w.s = s;
    for (std::size_t i = 0; i < n; ++i) {
      (in_charge(i) ? w.charge_set : w.discharge_set).push_back(run.first + i);
    }
    return BalanceSearchResult{WitnessSearch::Found, std::move(w)};
  };

  if (params.rho == 1.0) {
    for (std::size_t k = 0; k <= n; ++k) {
      if (auto s = accept(static_cast<double>(k), static_cast<double>(n)))
        return make_witness(*s, [k](std::size_t i) { return i < k; });
    }
    return {WitnessSearch::Absent, std::nullopt};
  }

  if (n > kMaxEnumeratedRun) return {WitnessSearch::Unknown, std::nullopt};

  // Weight of bit i is rho^(n-1-i). Split masks into high and low halves so
  // each candidate costs one addition.
  const std::size_t lo_bits = n / 2;
  const std::size_t hi_bits = n - lo_bits;
  auto subset_weights = [&](std::size_t offset, std::size_t bits) {
    std::vector<double> sums(std::size_t{1} << bits, 0.0);
    for (std::size_t mask = 1; mask < sums.size(); ++mask) {
      const std::size_t low = static_cast<std::size_t>(std::countr_zero(mask));
      sums[mask] = sums[mask & (mask - 1)] + power(params.rho, n - 1 - (offset + low));
    }
    return sums;
  };
  const std::vector<double> xlo = subset_weights(0, lo_bits);
  const std::vector<double> xhi = subset_weights(lo_bits, hi_bits);
  const double total = geometric_sum(params.rho, n);

  for (std::size_t hi = 0; hi < xhi.size(); ++hi) {
    for (std::size_t lo = 0; lo < xlo.size(); ++lo) {
      if (auto s = accept(xhi[hi] + xlo[lo], total)) {
        const std::uint64_t mask = (std::uint64_t{hi} << lo_bits) | lo;
        return make_witness(*s, [mask](std::size_t i) { return (mask >> i) & 1U; });
      }
    }
  }
  return {WitnessSearch::Absent, std::nullopt};
}

bool single_block_headroom(const StorageParams& params, const PricePartition& part) {
  if (part.negative_block_count() != 1) return false;
  const Block& first = part.blocks.front();
  return discharge_then_charge(params, params.s_init, first.positive, first.negative) <=
         params.s_max;
}

HeadroomSequence block_headroom_sequence(const StorageParams& params,
                                         const PricePartition& part) {
  if (!check_assumption_leakage(params))
    throw AssumptionViolated("leakage of a full store exceeds one period of full-rate charge");
  HeadroomSequence seq;
  double level = params.s_init;
  for (std::size_t j = 0; j < part.blocks.size(); ++j) {
    level = discharge_then_charge(params, level, part.blocks[j].positive, part.blocks[j].negative);
    seq.values.push_back(level);
    if (level > params.s_max) {
      seq.first_violation = j;
      break;
    }
  }
  return seq;
}

Advice advise(const StorageParams& params, const PricePartition& part,
              bool final_level_constrained) {
  Advice advice;
  auto record = [&](const char* rule, bool fired, std::string detail) {
    advice.rationale.push_back({rule, fired, std::move(detail)});
    return fired;
  };
  auto finish = [&](Recommendation r) {
    advice.recommendation = r;
    return advice;
  };

  const bool lossy = !params.lossless();
  const std::string eta = num(params.round_trip());
  if (record("positive_prices_lossy", part.t_neg.empty() && part.t_zero.empty() && lossy,
             fmt::format("{} negative and {} zero-price periods, round-trip efficiency {}",
                         part.t_neg.size(), part.t_zero.size(), eta)))
    return finish(Recommendation::SolveLP);
  if (record("perfect_round_trip", !lossy, fmt::format("round-trip efficiency {}", eta)))
    return finish(Recommendation::SolveLP);
  if (record("no_negative_prices", part.t_neg.empty(),
             fmt::format("{} negative-price periods", part.t_neg.size())))
    return finish(Recommendation::SolveLP);

  const double up = params.rho * params.s_min + params.max_net_charge();
  const double down = params.rho * params.s_max - params.max_net_discharge();
  if (record("single_period_full_swing", single_period_swing_inexact(params),
             fmt::format("one-period charge from s_min reaches {} (s_max {}), one-period "
                         "discharge from s_max reaches {} (s_min {})",
                         num(up), num(params.s_max), num(down), num(params.s_min))))
    return finish(Recommendation::SolveRefinedMilp);

  if (record("final_level_constrained", final_level_constrained,
             final_level_constrained ? "terminal level requested" : "terminal level free"))
    return finish(Recommendation::SolveRefinedMilp);

  const double run_fill = power(params.rho, part.n_bar) * params.s_min +
                          params.max_net_charge() * geometric_sum(params.rho, part.n_bar);
  if (record("longest_negative_run_overfills", longest_run_overfills(params, part),
             fmt::format("{} full-rate charge periods from s_min reach {} (s_max {})", part.n_bar,
                         num(run_fill), num(params.s_max))))
    return finish(Recommendation::SolveRefinedMilp);

  if (part.negative_block_count() == 1) {
    const Block& first = part.blocks.front();
    const double peak =
        discharge_then_charge(params, params.s_init, first.positive, first.negative);
    const bool ok = peak <= params.s_max;
    record("single_negative_block_headroom", ok,
           fmt::format("worst-case level after the negative run {} (s_max {})", num(peak),
                       num(params.s_max)));
    return finish(ok ? Recommendation::SolveLP : Recommendation::SolveRefinedMilp);
  }

  const bool recoverable = check_assumption_leakage(params);
  record("leakage_recoverable", recoverable,
         fmt::format("leakage of a full store {} vs one-period charge {}",
                     num((1.0 - params.rho) * params.s_max), num(params.max_net_charge())));
  if (!recoverable) return finish(Recommendation::SolveRefinedMilp);

  const HeadroomSequence seq = block_headroom_sequence(params, part);
  std::string detail = "levels [";
  for (std::size_t j = 0; j < seq.values.size(); ++j)
    detail += (j ? ", " : "") + num(seq.values[j]);
  detail += "]";
  if (seq.first_violation)
    detail += fmt::format(", block {} exceeds s_max {}", *seq.first_violation + 1,
                          num(params.s_max));
  record("block_headroom", seq.exact(), detail);
  return finish(seq.exact() ? Recommendation::SolveLP : Recommendation::SolveRefinedMilp);
}

const char* to_string(SpecialCase value) {
  switch (value) {
    case SpecialCase::ExactAllOptima: return "exact_all_optima";
    case SpecialCase::ExactSomeOptimumPerfectEta: return "exact_some_optimum_perfect_eta";
    case SpecialCase::ExactSomeOptimumNoNegPrices: return "exact_some_optimum_no_negative_prices";
    case SpecialCase::Inconclusive: return "inconclusive";
  }
  return "unknown";
}

const char* to_string(NetExchange value) {
  switch (value) {
    case NetExchange::NetChargeMax: return "net_charge_max";
    case NetExchange::NetDischargeMax: return "net_discharge_max";
    case NetExchange::ScdOptimal: return "scd_optimal";
  }
  return "unknown";
}

const char* to_string(Recommendation value) {
  switch (value) {
    case Recommendation::SolveLP: return "solve_lp";
    case Recommendation::SolveRefinedMilp: return "solve_refined_milp";
  }
  return "unknown";
}

}  // namespace storopt
