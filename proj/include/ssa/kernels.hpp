#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "ssa/level_schedule.hpp"
#include "ssa/rng.hpp"

namespace ssa {

// Compose tau applications of a kernel. tau <= 0 leaves the state untouched.
template <class State, class Kernel>
State tau_step(const Kernel& kernel, State x, int tau, RngStream& rng) {
  for (int i = 0; i < tau; ++i) x = kernel(x, rng);
  return x;
}

// Keep S(x) on the required side of a threshold. Used as the acceptance set
// for hit-and-run moves targeting a standard normal restricted to the set.
struct LevelConstraint {
  double threshold = 0;
  Orientation orientation = Orientation::SuperLevel;
  std::function<double(const std::vector<double>&)> performance;

  bool admits(const std::vector<double>& x) const {
    return levels_qualifies(orientation, performance(x), threshold);
  }
};

// One hit-and-run move for N(0, I) restricted by `constraint`. Picks a
// uniform unit direction d, then samples the line parameter from its exact
// conditional: the density along x + lambda d is proportional to
// exp(-(lambda + x.d)^2 / 2), i.e. lambda ~ N(-x.d, 1). The first of up to
// 100 proposals landing inside the constraint is taken; if all miss, the
// walker stays put (x itself is assumed feasible).
std::vector<double> hit_and_run_step(const std::vector<double>& x,
                                     const LevelConstraint& constraint, RngStream& rng);

// One Metropolis bit flip for the uniform law on {x in {0,1}^k : w.x <= b}:
// flip a uniformly chosen coordinate, keep the result only if it stays
// feasible. Symmetric proposal, so uniform over the feasible set is
// stationary. Throws InfeasibleState if x itself violates the constraint.
std::vector<std::uint8_t> bitflip_step(const std::vector<std::uint8_t>& x,
                                       const std::vector<double>& w, double b, RngStream& rng);

// The same move with the proposed coordinate fixed, for exact transition
// matrix checks.
std::vector<std::uint8_t> bitflip_apply(const std::vector<std::uint8_t>& x,
                                        const std::vector<double>& w, double b, std::size_t i);

}  // namespace ssa
