#include "ssa/saw.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <unordered_set>

namespace ssa {

namespace {

// collision-free key for lattice points (coordinates stay within +-n)
std::uint64_t point_key(long long x, long long y) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(x)) << 32) |
         static_cast<std::uint64_t>(static_cast<std::uint32_t>(y));
}

const int kDx[4] = {1, -1, 0, 0};
const int kDy[4] = {0, 0, 1, -1};

}  // namespace

int saw_prefix_length(const Walk& walk, int n) {
  const int cap = std::min<int>(n, static_cast<int>(walk.dirs.size()));
  std::unordered_set<std::uint64_t> visited;
  visited.reserve(static_cast<std::size_t>(cap) * 2 + 2);
  long long x = 0, y = 0;
  visited.insert(point_key(x, y));
  for (int t = 0; t < cap; ++t) {
    const int d = walk.dirs[static_cast<std::size_t>(t)];
    x += kDx[d];
    y += kDy[d];
    if (!visited.insert(point_key(x, y)).second) return t;  // step t+1 revisits
  }
  return cap;
}

std::pair<long long, long long> walk_endpoint(const Walk& walk) {
  long long x = 0, y = 0;
  for (auto d : walk.dirs) {
    x += kDx[d];
    y += kDy[d];
  }
  return {x, y};
}

LevelSchedule saw_levels(int n) {
  if (n < 1) throw std::invalid_argument("saw: walk length must be at least 1");
  LevelSchedule levels;
  levels.orientation = Orientation::SuperLevel;
  levels.thresholds.reserve(static_cast<std::size_t>(n) + 2);
  // n + 1 is a sentinel no walk reaches (prefix lengths cap at n), so the
  // final stratum is exactly the complete self-avoiding walks
  for (int t = 0; t <= n + 1; ++t) levels.thresholds.push_back(t);
  return levels;
}

ProblemSpec<Walk> saw_problem(int n) {
  if (n < 1) throw std::invalid_argument("saw: walk length must be at least 1");
  ProblemSpec<Walk> spec;
  spec.dimension_descriptor = "planar lattice walk, length " + std::to_string(n);
  spec.orientation = Orientation::SuperLevel;
  spec.initial_sampler = [](RngStream& rng) {
    Walk w;
    w.dirs.push_back(static_cast<std::uint8_t>(rng.uniform_int(4)));
    return w;
  };
  spec.performance = [n](const Walk& w) { return static_cast<double>(saw_prefix_length(w, n)); };
  spec.integrand = [](const Walk& w) {
    auto [x, y] = walk_endpoint(w);
    return std::hypot(static_cast<double>(x), static_cast<double>(y));
  };
  spec.kernel_factory = [n](int t, double) -> TransitionKernel<Walk> {
    if (t >= n) {
      // survivors of the last real level are finished walks; re-randomizing
      // anything would change the endpoint being measured
      return [](const Walk& w, RngStream&) { return w; };
    }
    // survivors of level t are self-avoiding over their first t steps, and
    // the unrealized suffix is i.i.d. uniform: materializing step t + 1 is an
    // exact draw, so one application already mixes completely
    return [t](const Walk& w, RngStream& rng) {
      Walk out;
      out.dirs.assign(w.dirs.begin(), w.dirs.begin() + t);
      out.dirs.push_back(static_cast<std::uint8_t>(rng.uniform_int(4)));
      return out;
    };
  };
  return spec;
}

SawEstimate estimate_cn_delta(int n, const RunConfig& config, double re_target,
                              std::size_t max_reps, std::vector<SsaRun>* runs_out) {
  if (n < 1) throw std::invalid_argument("saw: walk length must be at least 1");
  RunConfig cfg = config;
  cfg.burn_in = 1;  // the extension kernel is exact, extra steps only burn rng
  const LevelSchedule levels = saw_levels(n);
  const auto spec = saw_problem(n);
  const double log_4n = static_cast<double>(n) * std::log(4.0);

  const std::size_t batch = static_cast<std::size_t>(std::max(cfg.replications, 1));
  if (re_target <= 0)
    max_reps = batch;
  else if (max_reps == 0)
    max_reps = 64 * batch;

  std::vector<double> cn_vals, delta_vals;
  SawEstimate out;
  std::size_t r = 0;
  while (r < max_reps) {
    const std::size_t batch_end = std::min(max_reps, r + batch);
    for (; r < batch_end; ++r) {
      const std::uint64_t rep_seed = derive_seed(cfg.seed, kStreamRep, r);
      SsaRun run = cfg.mode == Mode::Issa ? run_issa(spec, levels, cfg, rep_seed)
                                          : run_ssa(spec, levels, cfg, rep_seed);
      // extinction gives log product -inf, hence a clean per-run count of 0
      cn_vals.push_back(std::exp(log_4n + run.log_level_products[static_cast<std::size_t>(n) - 1]));
      const StratumRecord& final_stratum = run.strata.back();
      delta_vals.push_back(final_stratum.empty_stratum
                               ? std::numeric_limits<double>::quiet_NaN()
                               : final_stratum.H_hat);
      if (runs_out) runs_out->push_back(std::move(run));
    }
    out.cn = aggregate_values(cn_vals);
    if (re_target <= 0) break;
    if (cn_vals.size() >= 2 && std::isfinite(out.cn.re) && out.cn.re <= re_target) break;
  }
  out.delta = aggregate_values(delta_vals);
  return out;
}

AggregateEstimate estimate_cn(int n, const RunConfig& config) {
  return estimate_cn_delta(n, config).cn;
}

AggregateEstimate estimate_delta(int n, const RunConfig& config) {
  return estimate_cn_delta(n, config).delta;
}

double mu_estimate(double c_hat, int n) {
  if (n < 1) throw std::invalid_argument("mu estimate: n must be at least 1");
  if (!(c_hat > 0)) throw NonPositiveEstimate("mu estimate: count estimate must be positive");
  return std::exp(std::log(c_hat) / static_cast<double>(n));
}

}  // namespace ssa
