#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "ssa/engine.hpp"

namespace ssa {

// Realized prefix of a lattice walk on Z^2. Directions: 0 +x, 1 -x, 2 +y,
// 3 -y. Steps beyond the realized prefix are i.i.d. uniform by convention and
// never materialized; every operation only ever looks at the prefix.
struct Walk {
  std::vector<std::uint8_t> dirs;
};

// Largest t <= n (and <= the realized length) whose first t steps visit t + 1
// distinct lattice points.
int saw_prefix_length(const Walk& walk, int n);

// endpoint of the realized prefix
std::pair<long long, long long> walk_endpoint(const Walk& walk);

// Thresholds (0, 1, ..., n, n+1): stratum t < n+1 holds walks whose
// self-avoiding prefix is exactly t - 1, the final stratum holds the full
// self-avoiding walks.
LevelSchedule saw_levels(int n);

// Performance = self-avoiding prefix length, integrand = endpoint distance of
// the realized prefix. The splitting kernel is the exact one-step extension:
// truncate to the level's prefix and append one uniform direction (identity
// at the final level, where nothing is left to re-randomize). One application
// already redraws everything random, so runs force burn_in = 1.
ProblemSpec<Walk> saw_problem(int n);

struct SawEstimate {
  AggregateEstimate cn;     // per run: 4^n prod_t R_hat_t, in log space
  AggregateEstimate delta;  // per run: mean endpoint distance of the final stratum
};

// One set of runs, both readouts. re_target > 0 keeps adding batches of
// config.replications runs until the count estimate reaches that relative
// error (capped at max_reps; 0 means 64 * config.replications).
SawEstimate estimate_cn_delta(int n, const RunConfig& config, double re_target = 0,
                              std::size_t max_reps = 0, std::vector<SsaRun>* runs_out = nullptr);

AggregateEstimate estimate_cn(int n, const RunConfig& config);
AggregateEstimate estimate_delta(int n, const RunConfig& config);

// connective-constant estimate c_hat^(1/n)
double mu_estimate(double c_hat, int n);

}  // namespace ssa
