#pragma once

#include <algorithm>

namespace routerlab {

enum class BudgetUnit { money, large_calls };

// Remaining-budget bookkeeping for hard-budget (capped) episodes.
// b_max and spent are in `unit` terms: money units or large-call counts.
struct BudgetState {
  double b_max = 0.0;
  double spent = 0.0;
  BudgetUnit unit = BudgetUnit::large_calls;

  double remaining() const { return b_max - spent; }

  // feature value: 1.0 means untouched budget, 0.0 exhausted
  double remaining_fraction() const {
    if (b_max <= 0.0) return 0.0;
    return std::clamp(remaining() / b_max, 0.0, 1.0);
  }
};

}  // namespace routerlab
