#pragma once

#include <vector>

namespace ssa {

// Which side of a threshold counts as "still alive". SuperLevel keeps
// S >= gamma (thresholds increase toward the rare set), SubLevel keeps
// S <= gamma (thresholds decrease).
enum class Orientation { SuperLevel, SubLevel };

inline bool levels_qualifies(Orientation o, double s, double gamma) {
  return o == Orientation::SuperLevel ? s >= gamma : s <= gamma;
}

// Thresholds gamma_0 .. gamma_n. gamma_0 covers the sampler's whole support,
// gamma_n is a sentinel nothing should reach, and stratum t is the slab
// between gamma_{t-1} and gamma_t. n = strata() strata in total.
struct LevelSchedule {
  std::vector<double> thresholds;
  Orientation orientation = Orientation::SuperLevel;

  int strata() const { return static_cast<int>(thresholds.size()) - 1; }

  bool qualifies(double s, double gamma) const {
    return levels_qualifies(orientation, s, gamma);
  }

  // at least one stratum, strictly monotone toward the rare set
  void validate() const;
};

// Sorted union of two threshold lists, duplicates removed, ordered by
// orientation (ascending for SuperLevel, descending for SubLevel).
std::vector<double> merge_thresholds(std::vector<double> a, const std::vector<double>& b,
                                     Orientation orientation);

}  // namespace ssa
