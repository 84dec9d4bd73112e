#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "ssa/bounds.hpp"
#include "ssa/engine.hpp"

namespace ssa {

// Weighted-sum tail problem on the binary cube: x uniform on {0,1}^k,
// S(x) = w.x, target P(S <= gamma).
struct WcmInstance {
  std::vector<double> w;  // positive weights
  double gamma = 0;

  std::size_t k() const { return w.size(); }
  double min_w() const;
  double max_w() const;
  double total() const;
  void validate() const;  // k >= 1, all w_i > 0, gamma <= total
};

// Schedule gamma_t = gamma + (n - t) min_w, t = 0..n, with
// n = floor((total - gamma) / min_w); decreasing toward the target set.
// gamma = total gives the degenerate single-threshold schedule (no strata).
LevelSchedule wcm_levels(const WcmInstance& inst);

// The engine-facing problem: uniform initial draws on the top level set
// (at most one state, the all-ones vector, can lie outside it and is
// resampled away), bit-flip kernel per level, indicator integrand.
ProblemSpec<std::vector<std::uint8_t>> wcm_problem(const WcmInstance& inst);

// Tail estimate: product of survivor fractions times the exactly known mass
// of the top level set, |X_{gamma_0}| / 2^k. Aggregated over
// config.replications runs (SSA or ISSA per config.mode).
AggregateEstimate wcm_tail(const WcmInstance& inst, const RunConfig& config,
                           std::vector<SsaRun>* runs_out = nullptr);

// E[S | S <= gamma] by direct averaging over the bit-flip chain on the target
// set: burn-in of burn_in * k flips, then m samples spaced burn_in flips
// apart, m = config.particles unless an accuracy target sizes it via the
// Hoeffding bound with [a, b] = [min_w, max_w].
AggregateEstimate wcm_condexp(const WcmInstance& inst, const RunConfig& config,
                              std::optional<ApproximationTarget> target = {});

// Worst-case level conditional probability: consecutive level sets shrink by
// at most a factor k + 1.
double wcm_r_lower_bound(std::size_t k);

}  // namespace ssa
