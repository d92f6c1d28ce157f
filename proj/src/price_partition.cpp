#include "storopt/price_partition.hpp"

#include <cmath>

#include "storopt/errors.hpp"

namespace storopt {

void PriceSeries::validate() const {
  if (prices.empty()) throw InvalidArgument("price series is empty");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument("period length must be positive");
  for (std::size_t t = 0; t < prices.size(); ++t) {
    if (!std::isfinite(prices[t]))
      throw InvalidArgument("price at period " + std::to_string(t + 1) + " is not finite");
  }
}

std::size_t PricePartition::negative_block_count() const noexcept {
  std::size_t count = 0;
  for (const Block& b : blocks) count += b.negative > 0 ? 1 : 0;
  return count;
}

PricePartition partition(std::span<const double> prices) {
  PricePartition part;
  Block current;
  std::size_t run_start = 0;
  std::size_t run_length = 0;

  for (std::size_t t = 0; t < prices.size(); ++t) {
    const double c = prices[t];
    if (c < 0.0) {
      part.t_neg.push_back(t);
      if (run_length == 0) run_start = t;
      ++run_length;
      ++current.negative;
      if (run_length > part.n_bar) {
        part.n_bar = run_length;
        part.longest_neg = Interval{run_start, t};
      }
    } else {
      part.t_pos.push_back(t);
      if (c == 0.0) part.t_zero.push_back(t);
      run_length = 0;
      if (current.negative > 0) {
        part.blocks.push_back(current);
        current = Block{};
      }
      ++current.positive;
    }
  }
  if (current.positive > 0 || current.negative > 0) part.blocks.push_back(current);
  return part;
}

std::vector<int> expand_signs(std::span<const Block> blocks) {
  std::vector<int> signs;
  for (const Block& b : blocks) {
    signs.insert(signs.end(), b.positive, 1);
    signs.insert(signs.end(), b.negative, -1);
  }
  return signs;
}

}  // namespace storopt
