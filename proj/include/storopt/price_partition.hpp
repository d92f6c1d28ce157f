#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace storopt {

/// Per-period market prices in EUR/MWh; `dt` is the period length in hours.
struct PriceSeries {
  std::vector<double> prices;
  double dt = 1.0;

  std::size_t size() const noexcept { return prices.size(); }
  double operator[](std::size_t t) const { return prices[t]; }

  /// Throws InvalidArgument on an empty series, non-finite price or dt <= 0.
  void validate() const;
};

/// One positive run followed by one negative run: p_j positive-or-zero
/// periods, then n_j strictly negative periods.
struct Block {
  std::size_t positive = 0;
  std::size_t negative = 0;

  friend bool operator==(const Block&, const Block&) = default;
};

/// Inclusive range of 0-based period indices.
struct Interval {
  std::size_t first = 0;
  std::size_t last = 0;

  std::size_t length() const noexcept { return last - first + 1; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

/// Sign-pattern decomposition of a price series. All indices are 0-based.
struct PricePartition {
  std::vector<std::size_t> t_neg;   // C_t < 0
  std::vector<std::size_t> t_pos;   // C_t >= 0
  std::vector<std::size_t> t_zero;  // C_t == 0, subset of t_pos
  std::vector<Block> blocks;
  std::optional<Interval> longest_neg;
  std::size_t n_bar = 0;

  std::size_t periods() const noexcept { return t_neg.size() + t_pos.size(); }
  std::size_t negative_block_count() const noexcept;
};

PricePartition partition(std::span<const double> prices);
inline PricePartition partition(const PriceSeries& prices) { return partition(prices.prices); }

/// Expands blocks back to a sign sequence: -1 for negative, +1 otherwise.
std::vector<int> expand_signs(std::span<const Block> blocks);

}  // namespace storopt
