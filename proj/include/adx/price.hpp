#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstdint>
#include <stdexcept>

namespace adx {

// Currency is tracked in integer grid steps (1/G currency units), so budget
// ledgers stay exact over arbitrarily long episodes.
using Money = std::int64_t;

// A price on the discrete grid {0, 1/G, ..., 1}. Only the index is stored;
// the grid supplies the mapping to [0,1].
struct Price {
  int index = 0;
  friend constexpr bool operator==(Price a, Price b) { return a.index == b.index; }
  friend constexpr auto operator<=>(Price a, Price b) { return a.index <=> b.index; }
};

class PriceGrid {
 public:
  explicit PriceGrid(int resolution = 1000) : res_(resolution) {
    if (resolution < 1) throw std::invalid_argument("grid resolution must be >= 1");
  }

  int resolution() const { return res_; }
  int size() const { return res_ + 1; }

  double value(Price p) const { return static_cast<double>(p.index) / res_; }

  Price clamp(int idx) const {
    return Price{std::clamp(idx, 0, res_)};
  }

  // Nearest grid point, with values outside [0,1] clipped to the boundary.
  Price snapNearest(double v) const {
    return clamp(static_cast<int>(std::lround(v * res_)));
  }

  Price snapDown(double v) const {
    return clamp(static_cast<int>(std::floor(v * res_)));
  }

  Money money(Price p) const { return p.index; }
  double currency(Money m) const { return static_cast<double>(m) / res_; }
  Money moneyFromCurrency(double c) const {
    return static_cast<Money>(std::llround(c * res_));
  }

  friend bool operator==(const PriceGrid& a, const PriceGrid& b) {
    return a.res_ == b.res_;
  }

 private:
  int res_;
};

}  // namespace adx
