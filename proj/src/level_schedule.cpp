#include "ssa/level_schedule.hpp"

#include <algorithm>

#include "ssa/errors.hpp"

namespace ssa {

void LevelSchedule::validate() const {
  if (thresholds.size() < 2)
    throw NonPositiveLevels("schedule needs at least two thresholds (one stratum)");
  for (std::size_t i = 1; i < thresholds.size(); ++i) {
    bool ok = orientation == Orientation::SuperLevel ? thresholds[i] > thresholds[i - 1]
                                                     : thresholds[i] < thresholds[i - 1];
    if (!ok)
      throw NonPositiveLevels("schedule thresholds must be strictly monotone toward the rare set");
  }
}

std::vector<double> merge_thresholds(std::vector<double> a, const std::vector<double>& b,
                                     Orientation orientation) {
  a.insert(a.end(), b.begin(), b.end());
  std::sort(a.begin(), a.end());
  a.erase(std::unique(a.begin(), a.end()), a.end());
  if (orientation == Orientation::SubLevel) std::reverse(a.begin(), a.end());
  return a;
}

}  // namespace ssa
