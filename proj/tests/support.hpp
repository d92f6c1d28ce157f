#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <random>
#include <string>
#include <vector>

#include "storopt/price_partition.hpp"
#include "storopt/storage_model.hpp"

namespace storopt::testing {

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline std::size_t pick(Rng& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

inline bool coin(Rng& rng, double p) { return std::bernoulli_distribution(p)(rng); }

inline double round_to(double v, double step) { return std::round(v / step) * step; }

struct ParamRanges {
  double eta_lo = 0.8;
  double lossless_prob = 0.1;
  double leak_prob = 0.3;
  double rate_lo = 0.05;  // as a fraction of capacity per hour
  double rate_hi = 1.5;
};

inline StorageParams random_params(Rng& rng, const ParamRanges& r = {}) {
  StorageParams p;
  p.s_min = coin(rng, 0.5) ? 0.0 : round_to(uniform(rng, 0.0, 0.3), 0.01);
  p.s_max = p.s_min + round_to(uniform(rng, 0.5, 2.0), 0.01);
  p.s_init = round_to(uniform(rng, p.s_min, p.s_max), 0.01);
  p.s_init = std::clamp(p.s_init, p.s_min, p.s_max);
  const double cap = p.s_max - p.s_min;
  p.p_chg_max = round_to(cap * uniform(rng, r.rate_lo, r.rate_hi), 0.001) + 0.001;
  p.p_dis_max = round_to(cap * uniform(rng, r.rate_lo, r.rate_hi), 0.001) + 0.001;
  if (coin(rng, r.lossless_prob)) {
    p.eta_c = p.eta_d = 1.0;
  } else {
    p.eta_c = round_to(uniform(rng, r.eta_lo, 0.99), 0.01);
    p.eta_d = round_to(uniform(rng, r.eta_lo, 0.99), 0.01);
  }
  p.rho = coin(rng, r.leak_prob) ? round_to(uniform(rng, 0.95, 0.999), 0.001) : 1.0;
  const double dts[] = {1.0, 1.0, 0.5, 0.25};
  p.dt = dts[pick(rng, 0, 3)];
  return p;
}

/// Mixed-sign prices in EUR/MWh rounded to cents, with negative runs and the
/// occasional exact zero.
inline PriceSeries random_prices(Rng& rng, std::size_t T, double dt, double neg_prob = 0.3,
                                 double zero_prob = 0.05) {
  PriceSeries s;
  s.dt = dt;
  bool in_negative = false;
  for (std::size_t t = 0; t < T; ++t) {
    in_negative = coin(rng, in_negative ? 0.7 : neg_prob);
    double price;
    if (coin(rng, zero_prob))
      price = 0.0;
    else if (in_negative)
      price = -round_to(uniform(rng, 1.0, 40.0), 0.01);
    else
      price = round_to(uniform(rng, 1.0, 150.0), 0.01);
    s.prices.push_back(price);
  }
  return s;
}

/// sum_{t=1}^{n} rho^{n-t} in closed form.
inline double closed_geometric(double rho, std::size_t n) {
  if (rho == 1.0) return static_cast<double>(n);
  return (1.0 - std::pow(rho, static_cast<double>(n))) / (1.0 - rho);
}

/// Longest run of strictly negative entries by exhaustive scan of all
/// windows.
inline std::size_t brute_longest_negative_run(const std::vector<double>& c) {
  std::size_t best = 0;
  for (std::size_t a = 0; a < c.size(); ++a) {
    std::size_t b = a;
    while (b < c.size() && c[b] < 0.0) ++b;
    best = std::max(best, b - a);
  }
  return best;
}

/// Worst-case level recurrence written with closed-form sums and 1-based
/// block indices.
inline std::vector<double> oracle_headroom(const StorageParams& p,
                                           const std::vector<Block>& blocks) {
  std::vector<double> out;
  double prev = p.s_init;
  for (const Block& b : blocks) {
    const double drained = std::pow(p.rho, static_cast<double>(b.positive)) * prev -
                           p.dt * p.p_dis_max / p.eta_d * closed_geometric(p.rho, b.positive);
    const double level = std::pow(p.rho, static_cast<double>(b.negative)) *
                             std::max(drained, p.s_min) +
                         p.dt * p.eta_c * p.p_chg_max * closed_geometric(p.rho, b.negative);
    out.push_back(level);
    if (level > p.s_max) break;
    prev = level;
  }
  return out;
}

inline bool rel_close(double a, double b, double rel, double abs_floor = 1e-10) {
  return std::abs(a - b) <= rel * std::max(std::abs(a), std::abs(b)) + abs_floor;
}

inline PriceSeries series(std::vector<double> prices, double dt = 1.0) {
  PriceSeries s;
  s.prices = std::move(prices);
  s.dt = dt;
  return s;
}

/// Storage with zero bounds, unit capacity and lossless defaults, adjusted by
/// the caller.
inline StorageParams unit_storage(double p_chg, double p_dis, double eta) {
  StorageParams p;
  p.s_min = 0.0;
  p.s_max = 1.0;
  p.s_init = 0.0;
  p.p_chg_max = p_chg;
  p.p_dis_max = p_dis;
  p.eta_c = eta;
  p.eta_d = eta;
  return p;
}

inline std::string fixture(const std::string& name) {
  return std::string(STOROPT_FIXTURE_DIR) + "/" + name;
}

}  // namespace storopt::testing
