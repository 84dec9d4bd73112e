#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "ssa/errors.hpp"
#include "ssa/level_schedule.hpp"
#include "ssa/parallel.hpp"
#include "ssa/rng.hpp"

namespace ssa {

enum class Mode { Ssa, Issa };

struct RunConfig {
  std::size_t particles = 1000;  // N, population size per level
  int burn_in = 50;              // tau, kernel steps per splitting transition
  double rho = 0.1;              // pilot quantile for adaptive levels
  int replications = 6;          // R, independent repetitions
  std::uint64_t seed = 1;
  Mode mode = Mode::Ssa;
  unsigned threads = 1;          // worker cap; never changes the results
};

template <class State>
using TransitionKernel = std::function<State(const State&, RngStream&)>;

// Everything the engine needs to know about a problem: how to draw from the
// base law f, how to score a state, what to integrate, and how to move inside
// a level set without leaving it.
template <class State>
struct ProblemSpec {
  std::string dimension_descriptor;  // informational only
  Orientation orientation = Orientation::SuperLevel;
  std::function<State(RngStream&)> initial_sampler;
  std::function<double(const State&)> performance;  // S(x)
  std::function<double(const State&)> integrand;    // phi(x)
  // kernel whose stationary law is f conditioned on the level set closed by
  // `threshold` (the set survivors of level index t enter)
  std::function<TransitionKernel<State>(int t, double threshold)> kernel_factory;
};

struct StratumRecord {
  int t = 0;                // 1-based level index
  double gamma = 0;         // threshold gamma_t closing this stratum
  std::size_t size_X = 0;   // particles present at this stage
  std::size_t size_Z = 0;   // of those, how many fell into the stratum
  double R_hat = 0;         // |Y_t| / |X_t|, survivor fraction
  double P_hat = 0;         // (1 - R_hat_t) * prod_{j<t} R_hat_j
  double H_hat = 0;         // mean integrand over the stratum, 0 if empty
  double C_hat = 0;         // H_hat * P_hat
  bool empty_stratum = false;
};

struct SsaRun {
  std::vector<StratumRecord> strata;
  // log prod_{j<=t} R_hat_j per level; -inf from the first extinct level on
  std::vector<double> log_level_products;
  double estimate = 0;            // sum of C_hat over all strata
  bool terminated_early = false;  // ran out of survivors before the last level

  bool any_empty_stratum() const {
    for (const auto& r : strata)
      if (r.empty_stratum) return true;
    return false;
  }
};

struct AggregateEstimate {
  double mean = std::numeric_limits<double>::quiet_NaN();
  // sample std / (|mean| sqrt(R)); NaN when R < 2, +inf when the mean is zero
  double re = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> per_run;

  std::size_t runs() const { return per_run.size(); }
};

struct StratumEstimates {
  double H_hat = 0, P_hat = 0, C_hat = 0;
  bool empty_stratum = false;
};

// --- non-template pieces (engine.cpp) ---------------------------------------

// Splitting factors M_i = floor(N / survivors) + K_i with exactly
// N mod survivors of the K_i equal to 1, chosen uniformly without replacement.
std::vector<std::size_t> split_allocation(std::size_t survivors, std::size_t total,
                                          RngStream& rng);

// Estimates for one stratum given the integrand values observed in it and the
// survivor fractions R_hat_1..R_hat_t (current level last).
StratumEstimates stratum_estimates(const std::vector<double>& phi_values,
                                   const std::vector<double>& r_hats);

// Mean and relative error over per-run values; NaN entries (runs where the
// quantity was undefined) are dropped.
AggregateEstimate aggregate_values(const std::vector<double>& values);

// 100 * (estimate - truth) / truth
double percent_error(double estimate, double truth);

// --- population propagation --------------------------------------------------

// Walks a population through the schedule: draw N states from f, classify at
// each level, split the survivors with exact-multiplicity allocation and
// tau-fold kernel moves. on_stage(t, particles, survives) sees every stage
// that exists; extinction before the last level simply ends the walk. All
// randomness is keyed by (seed, tag, level, index) so any thread count gives
// the same populations.
template <class State, class StageFn>
void ssa_propagate(const ProblemSpec<State>& spec, const LevelSchedule& levels,
                   const RunConfig& config, std::uint64_t seed, StageFn&& on_stage) {
  const int n = levels.strata();
  const std::size_t N = config.particles;

  std::vector<State> particles(N);
  parallel_for(N, config.threads, [&](std::size_t i) {
    RngStream rng(derive_seed(seed, kStreamInit, 0, i));
    particles[i] = spec.initial_sampler(rng);
  });

  for (int t = 1; t <= n; ++t) {
    const double gamma_t = levels.thresholds[t];
    std::vector<char> survives(particles.size());
    std::size_t n_surv = 0;
    for (std::size_t i = 0; i < particles.size(); ++i) {
      survives[i] = levels.qualifies(spec.performance(particles[i]), gamma_t) ? 1 : 0;
      n_surv += survives[i];
    }
    on_stage(t, particles, survives);
    if (t == n || n_surv == 0) return;

    std::vector<State> survivors;
    survivors.reserve(n_surv);
    for (std::size_t i = 0; i < particles.size(); ++i)
      if (survives[i]) survivors.push_back(std::move(particles[i]));

    RngStream alloc_rng(derive_seed(seed, kStreamAlloc, static_cast<std::uint64_t>(t)));
    std::vector<std::size_t> mult = split_allocation(n_surv, N, alloc_rng);
    std::vector<std::size_t> offset(n_surv + 1, 0);
    for (std::size_t i = 0; i < n_surv; ++i) offset[i + 1] = offset[i] + mult[i];

    auto kernel = spec.kernel_factory(t, gamma_t);
    std::vector<State> next(N);
    parallel_for(n_surv, config.threads, [&](std::size_t i) {
      RngStream rng(derive_seed(seed, kStreamKernel, static_cast<std::uint64_t>(t), i));
      State x = survivors[i];
      for (std::size_t j = 0; j < mult[i]; ++j) {
        for (int s = 0; s < config.burn_in; ++s) x = kernel(x, rng);
        next[offset[i] + j] = x;
      }
    });
    particles = std::move(next);
  }
}

namespace detail {

// Shared estimator bookkeeping: feeds classified stages into records and the
// running products, and pads the records when a run dies early.
class RunAccumulator {
 public:
  RunAccumulator(const LevelSchedule& levels, SsaRun& run)
      : levels_(levels), run_(run) {
    run_.strata.reserve(levels.strata());
    run_.log_level_products.reserve(levels.strata());
  }

  void stage(int t, std::size_t size_X, std::size_t size_Z, double phi_sum_Z) {
    StratumRecord rec;
    rec.t = t;
    rec.gamma = levels_.thresholds[t];
    rec.size_X = size_X;
    rec.size_Z = size_Z;
    rec.empty_stratum = (size_Z == 0);
    rec.H_hat = rec.empty_stratum ? 0.0 : phi_sum_Z / static_cast<double>(size_Z);
    rec.R_hat = size_X == 0 ? 0.0
                            : static_cast<double>(size_X - size_Z) / static_cast<double>(size_X);
    rec.P_hat = (1.0 - rec.R_hat) * running_prod_;
    rec.C_hat = rec.H_hat * rec.P_hat;
    running_prod_ *= rec.R_hat;
    running_log_ += std::log(rec.R_hat);  // log(0) = -inf, sticky from here on
    run_.strata.push_back(rec);
    run_.log_level_products.push_back(running_log_);
  }

  // levels the run never reached: zero mass, empty strata
  void finish() {
    const int n = levels_.strata();
    const int seen = static_cast<int>(run_.strata.size());
    if (seen < n) run_.terminated_early = true;
    for (int t = seen + 1; t <= n; ++t) stage(t, 0, 0, 0.0);
    double total = 0;
    for (const auto& r : run_.strata) total += r.C_hat;
    run_.estimate = total;
  }

 private:
  const LevelSchedule& levels_;
  SsaRun& run_;
  double running_prod_ = 1.0;
  double running_log_ = 0.0;
};

inline void check_run_inputs(const LevelSchedule& levels, Orientation spec_orientation,
                             const RunConfig& config) {
  levels.validate();
  if (levels.orientation != spec_orientation)
    throw std::invalid_argument("schedule orientation does not match the problem");
  if (config.particles == 0) throw EmptyInitialSample("population size is zero");
}

}  // namespace detail

// One stratified run: N particles walked through the schedule, one record per
// stratum, estimate = sum of C_hat (exactly, by construction).
template <class State>
SsaRun run_ssa(const ProblemSpec<State>& spec, const LevelSchedule& levels,
               const RunConfig& config, std::uint64_t seed) {
  detail::check_run_inputs(levels, spec.orientation, config);
  SsaRun run;
  detail::RunAccumulator acc(levels, run);
  ssa_propagate(spec, levels, config, seed,
                [&](int t, const std::vector<State>& particles, const std::vector<char>& survives) {
                  std::size_t size_Z = 0;
                  double phi_sum = 0;
                  for (std::size_t i = 0; i < particles.size(); ++i) {
                    if (!survives[i]) {
                      ++size_Z;
                      phi_sum += spec.integrand(particles[i]);
                    }
                  }
                  acc.stage(t, particles.size(), size_Z, phi_sum);
                });
  acc.finish();
  return run;
}

// Independent-restart variant: the population at each level beyond the first
// is assembled from one uniformly chosen representative per independent
// sub-run, so within-level samples are independent. A single batch of
// sub-runs feeds every level. Estimator identical to run_ssa.
template <class State>
SsaRun run_issa(const ProblemSpec<State>& spec, const LevelSchedule& levels,
                const RunConfig& config, std::uint64_t seed) {
  detail::check_run_inputs(levels, spec.orientation, config);
  const int n = levels.strata();
  if (n <= 1) return run_ssa(spec, levels, config, seed);  // nothing to restart

  const std::size_t N = config.particles;
  std::vector<std::vector<State>> pops(static_cast<std::size_t>(n) + 1);

  // level 1 needs no restarts: the initial draws are already independent
  pops[1].resize(N);
  parallel_for(N, config.threads, [&](std::size_t i) {
    RngStream rng(derive_seed(seed, kStreamInit, 0, i));
    pops[1][i] = spec.initial_sampler(rng);
  });

  const std::size_t max_subruns = 4 * N + 64;
  for (std::size_t j = 0; j < max_subruns; ++j) {
    bool full = true;
    for (int t = 2; t <= n; ++t)
      if (pops[t].size() < N) full = false;
    if (full) break;

    std::vector<std::vector<State>> stage_pops(static_cast<std::size_t>(n) + 1);
    std::uint64_t sub_seed = derive_seed(seed, kStreamSubrun, j);
    ssa_propagate(spec, levels, config, sub_seed,
                  [&](int t, const std::vector<State>& particles, const std::vector<char>&) {
                    if (t >= 2) stage_pops[t] = particles;
                  });
    RngStream pick(derive_seed(seed, kStreamPick, j));
    for (int t = 2; t <= n; ++t) {
      if (stage_pops[t].empty()) break;  // sub-run died before this level
      if (pops[t].size() < N)
        pops[t].push_back(stage_pops[t][pick.uniform_int(stage_pops[t].size())]);
    }
  }

  SsaRun run;
  detail::RunAccumulator acc(levels, run);
  for (int t = 1; t <= n; ++t) {
    const auto& pop = pops[t];
    if (pop.empty()) break;  // nothing ever reached this level
    const double gamma_t = levels.thresholds[t];
    std::size_t size_Z = 0;
    double phi_sum = 0;
    for (const State& x : pop) {
      if (!levels.qualifies(spec.performance(x), gamma_t)) {
        ++size_Z;
        phi_sum += spec.integrand(x);
      }
    }
    acc.stage(t, pop.size(), size_Z, phi_sum);
  }
  acc.finish();
  return run;
}

// --- replication --------------------------------------------------------------

// R independent repetitions; extract() turns each run into the scalar being
// aggregated (NaN marks a run where it is undefined).
template <class State>
AggregateEstimate replicate_transform(const ProblemSpec<State>& spec, const LevelSchedule& levels,
                                      const RunConfig& config,
                                      const std::function<double(const SsaRun&)>& extract,
                                      std::vector<SsaRun>* runs_out = nullptr) {
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(config.replications));
  for (int r = 0; r < config.replications; ++r) {
    std::uint64_t rep_seed = derive_seed(config.seed, kStreamRep, static_cast<std::uint64_t>(r));
    SsaRun run = config.mode == Mode::Issa ? run_issa(spec, levels, config, rep_seed)
                                           : run_ssa(spec, levels, config, rep_seed);
    values.push_back(extract(run));
    if (runs_out) runs_out->push_back(std::move(run));
  }
  return aggregate_values(values);
}

template <class State>
AggregateEstimate replicate(const ProblemSpec<State>& spec, const LevelSchedule& levels,
                            const RunConfig& config, std::vector<SsaRun>* runs_out = nullptr) {
  return replicate_transform<State>(spec, levels, config,
                                    [](const SsaRun& run) { return run.estimate; }, runs_out);
}

// Keeps adding batches of config.replications runs until the relative error
// of the extracted quantity drops to re_target (or max_reps is hit).
template <class State>
AggregateEstimate replicate_to_re(const ProblemSpec<State>& spec, const LevelSchedule& levels,
                                  const RunConfig& config,
                                  const std::function<double(const SsaRun&)>& extract,
                                  double re_target, std::size_t max_reps,
                                  std::vector<SsaRun>* runs_out = nullptr) {
  std::vector<double> values;
  std::size_t r = 0;
  AggregateEstimate agg;
  while (r < max_reps) {
    std::size_t batch_end = std::min(max_reps, r + static_cast<std::size_t>(config.replications));
    for (; r < batch_end; ++r) {
      std::uint64_t rep_seed = derive_seed(config.seed, kStreamRep, r);
      SsaRun run = config.mode == Mode::Issa ? run_issa(spec, levels, config, rep_seed)
                                             : run_ssa(spec, levels, config, rep_seed);
      values.push_back(extract(run));
      if (runs_out) runs_out->push_back(std::move(run));
    }
    agg = aggregate_values(values);
    if (values.size() >= 2 && std::isfinite(agg.re) && agg.re <= re_target) break;
  }
  return agg;
}

// --- pilot ---------------------------------------------------------------------

struct PilotOptions {
  double base_level = 0;          // gamma_0, must cover the sampler's support
  double terminal = 0;            // gamma_n sentinel nothing should reach
  std::vector<double> mandatory;  // thresholds that must appear in the schedule
};

struct PilotResult {
  LevelSchedule schedule;
  bool stalled = false;  // adaptation pinned before reaching the terminal
  SsaRun pilot_run;      // estimates over the adaptive schedule, for optional pooling
};

// One adaptive pass: each next threshold is the rho-quantile of the current
// population's performance (the ceil(rho N)-th best, ties included), clamped
// so no mandatory threshold is skipped. Terminates when the candidate reaches
// the terminal sentinel or stops improving; the frozen schedule always ends
// with the terminal and contains every mandatory threshold strictly between
// base and terminal.
template <class State>
PilotResult pilot_levels(const ProblemSpec<State>& spec, const RunConfig& config,
                         const PilotOptions& opts, std::uint64_t seed) {
  if (config.particles == 0) throw EmptyInitialSample("pilot: population size is zero");
  const bool super = spec.orientation == Orientation::SuperLevel;
  // "b lies strictly beyond a", in the direction of the rare set
  auto beyond = [super](double a, double b) { return super ? b > a : b < a; };
  if (!beyond(opts.base_level, opts.terminal))
    throw NonPositiveLevels("pilot: terminal does not lie beyond the base level");

  std::vector<double> pending = opts.mandatory;
  std::sort(pending.begin(), pending.end());
  if (!super) std::reverse(pending.begin(), pending.end());
  // keep only thresholds strictly inside (base, terminal)
  std::vector<double> inside;
  for (double v : pending)
    if (beyond(opts.base_level, v) && beyond(v, opts.terminal)) inside.push_back(v);
  pending = std::move(inside);
  std::size_t next_mand = 0;

  const std::size_t N = config.particles;
  std::vector<State> particles(N);
  parallel_for(N, config.threads, [&](std::size_t i) {
    RngStream rng(derive_seed(seed, kStreamInit, 0, i));
    particles[i] = spec.initial_sampler(rng);
  });

  PilotResult result;
  result.schedule.orientation = spec.orientation;
  std::vector<double> thresholds{opts.base_level};

  // records over the adaptive schedule, same math as run_ssa
  std::vector<std::size_t> sizes_X, sizes_Z;
  std::vector<double> phi_sums;

  double prev = opts.base_level;
  const int max_levels = 100000;  // guard against pathological configurations
  std::vector<double> perfs(N);
  for (int t = 1; t <= max_levels; ++t) {
    for (std::size_t i = 0; i < N; ++i) perfs[i] = spec.performance(particles[i]);
    std::size_t kth = static_cast<std::size_t>(std::ceil(config.rho * static_cast<double>(N)));
    kth = std::min(std::max<std::size_t>(kth, 1), N);
    std::vector<double> sorted = perfs;
    if (super)
      std::nth_element(sorted.begin(), sorted.begin() + (kth - 1), sorted.end(),
                       std::greater<double>());
    else
      std::nth_element(sorted.begin(), sorted.begin() + (kth - 1), sorted.end());
    double cand = sorted[kth - 1];

    if (!beyond(prev, cand)) {
      result.stalled = true;  // survivors stopped improving
      break;
    }
    double next = cand;
    // a candidate at or beyond the next mandatory threshold stops there
    if (next_mand < pending.size() && !beyond(cand, pending[next_mand])) {
      next = pending[next_mand];
      ++next_mand;
    }
    if (!beyond(next, opts.terminal)) break;  // adaptation reached the sentinel zone

    thresholds.push_back(next);
    std::vector<char> survives(N);
    std::size_t n_surv = 0;
    double phi_sum = 0;
    for (std::size_t i = 0; i < N; ++i) {
      survives[i] = levels_qualifies(spec.orientation, perfs[i], next) ? 1 : 0;
      if (survives[i])
        ++n_surv;
      else
        phi_sum += spec.integrand(particles[i]);
    }
    sizes_X.push_back(N);
    sizes_Z.push_back(N - n_surv);
    phi_sums.push_back(phi_sum);

    // split back to N inside the new level set (n_surv >= 1 because the
    // threshold never exceeds an observed performance value)
    std::vector<State> survivors;
    survivors.reserve(n_surv);
    for (std::size_t i = 0; i < N; ++i)
      if (survives[i]) survivors.push_back(std::move(particles[i]));
    RngStream alloc_rng(derive_seed(seed, kStreamAlloc, static_cast<std::uint64_t>(t)));
    std::vector<std::size_t> mult = split_allocation(n_surv, N, alloc_rng);
    std::vector<std::size_t> offset(n_surv + 1, 0);
    for (std::size_t i = 0; i < n_surv; ++i) offset[i + 1] = offset[i] + mult[i];
    auto kernel = spec.kernel_factory(t, next);
    std::vector<State> next_pop(N);
    parallel_for(n_surv, config.threads, [&](std::size_t i) {
      RngStream rng(derive_seed(seed, kStreamKernel, static_cast<std::uint64_t>(t), i));
      State x = survivors[i];
      for (std::size_t j = 0; j < mult[i]; ++j) {
        for (int s = 0; s < config.burn_in; ++s) x = kernel(x, rng);
        next_pop[offset[i] + j] = x;
      }
    });
    particles = std::move(next_pop);
    prev = next;
  }

  // close the schedule: pending mandatory thresholds beyond the last adaptive
  // level still belong in it, then the terminal sentinel
  std::vector<double> closing;
  for (; next_mand < pending.size(); ++next_mand)
    if (beyond(prev, pending[next_mand])) closing.push_back(pending[next_mand]);
  closing.push_back(opts.terminal);

  // classify the final population against the closing thresholds without any
  // further splitting; populations shrink to the survivors each time
  for (double g : closing) {
    thresholds.push_back(g);
    std::vector<State> kept;
    double phi_sum = 0;
    for (auto& x : particles) {
      if (levels_qualifies(spec.orientation, spec.performance(x), g))
        kept.push_back(std::move(x));
      else
        phi_sum += spec.integrand(x);
    }
    sizes_X.push_back(particles.size());
    sizes_Z.push_back(particles.size() - kept.size());
    phi_sums.push_back(phi_sum);
    particles = std::move(kept);
  }

  result.schedule.thresholds = std::move(thresholds);
  result.schedule.validate();
  detail::RunAccumulator acc(result.schedule, result.pilot_run);
  for (std::size_t i = 0; i < sizes_X.size(); ++i)
    acc.stage(static_cast<int>(i) + 1, sizes_X[i], sizes_Z[i], phi_sums[i]);
  acc.finish();
  return result;
}

}  // namespace ssa
