#ifndef H2CHAIN_PRICES_HPP
#define H2CHAIN_PRICES_HPP

#include <vector>

#include "h2chain/scenario.hpp"

namespace h2chain {

// Per-period buying price the cavern offers ($/kg).
struct PriceSchedule {
  std::vector<double> prices;

  static PriceSchedule flat(int periods, double price) { return {std::vector<double>(periods, price)}; }
  static PriceSchedule floor_of(const Scenario& s) { return {s.cavern.price_floor}; }
  static PriceSchedule ceiling_of(const Scenario& s) { return {s.cavern.price_ceiling}; }

  bool within_bounds(const Scenario& s, double tol = 1e-12) const {
    if (static_cast<int>(prices.size()) != s.periods()) return false;
    for (int t = 0; t < s.periods(); ++t) {
      if (prices[t] < s.cavern.price_floor[t] - tol || prices[t] > s.cavern.price_ceiling[t] + tol) return false;
    }
    return true;
  }

  friend bool operator==(const PriceSchedule&, const PriceSchedule&) = default;
};

}  // namespace h2chain

#endif  // H2CHAIN_PRICES_HPP
