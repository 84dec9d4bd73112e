#include "ssa/wcm.hpp"

#include <algorithm>
#include <cmath>

#include "ssa/kernels.hpp"

namespace ssa {

double WcmInstance::min_w() const { return *std::min_element(w.begin(), w.end()); }
double WcmInstance::max_w() const { return *std::max_element(w.begin(), w.end()); }

double WcmInstance::total() const {
  double s = 0;
  for (double wi : w) s += wi;
  return s;
}

void WcmInstance::validate() const {
  if (w.empty()) throw std::invalid_argument("weighted instance: no weights");
  for (double wi : w)
    if (!(wi > 0)) throw std::invalid_argument("weighted instance: weights must be positive");
  if (gamma > total()) throw NonPositiveLevels("weighted instance: gamma exceeds the total weight");
}

LevelSchedule wcm_levels(const WcmInstance& inst) {
  inst.validate();
  const double wmin = inst.min_w();
  const int n = static_cast<int>(std::floor((inst.total() - inst.gamma) / wmin));
  LevelSchedule levels;
  levels.orientation = Orientation::SubLevel;
  levels.thresholds.reserve(n + 1);
  for (int t = 0; t <= n; ++t) levels.thresholds.push_back(inst.gamma + (n - t) * wmin);
  return levels;
}

namespace {

double weight_sum(const std::vector<double>& w, const std::vector<std::uint8_t>& x) {
  double s = 0;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (x[i]) s += w[i];
  return s;
}

bool all_ones(const std::vector<std::uint8_t>& x) {
  for (auto v : x)
    if (!v) return false;
  return true;
}

}  // namespace

ProblemSpec<std::vector<std::uint8_t>> wcm_problem(const WcmInstance& inst) {
  inst.validate();
  const LevelSchedule levels = wcm_levels(inst);
  const double gamma0 = levels.thresholds.front();
  // gamma_0 = gamma + n min_w satisfies total - min_w < gamma_0 <= total, so
  // at most the all-ones state lies above it
  const bool exclude_top = inst.total() > gamma0;

  ProblemSpec<std::vector<std::uint8_t>> spec;
  spec.dimension_descriptor = "binary cube, k = " + std::to_string(inst.k());
  spec.orientation = Orientation::SubLevel;
  const std::vector<double> w = inst.w;
  const double gamma = inst.gamma;
  spec.initial_sampler = [w, exclude_top](RngStream& rng) {
    std::vector<std::uint8_t> x(w.size());
    for (;;) {
      for (auto& bit : x) bit = static_cast<std::uint8_t>(rng.uniform_int(2));
      if (!exclude_top || !all_ones(x)) return x;
    }
  };
  spec.performance = [w](const std::vector<std::uint8_t>& x) { return weight_sum(w, x); };
  spec.integrand = [w, gamma](const std::vector<std::uint8_t>& x) {
    return weight_sum(w, x) <= gamma ? 1.0 : 0.0;
  };
  spec.kernel_factory = [w](int, double threshold) -> TransitionKernel<std::vector<std::uint8_t>> {
    return [w, threshold](const std::vector<std::uint8_t>& x, RngStream& rng) {
      return bitflip_step(x, w, threshold, rng);
    };
  };
  return spec;
}

AggregateEstimate wcm_tail(const WcmInstance& inst, const RunConfig& config,
                           std::vector<SsaRun>* runs_out) {
  inst.validate();
  const LevelSchedule levels = wcm_levels(inst);
  const int n = levels.strata();
  const int k = static_cast<int>(inst.k());

  // mass of the top level set is known exactly
  const bool exclude_top = inst.total() > levels.thresholds.front();
  const double top_mass = 1.0 - (exclude_top ? std::ldexp(1.0, -k) : 0.0);

  if (n == 0) {
    // every state already satisfies the threshold except possibly the
    // excluded one: the tail is exact, no run needed
    std::vector<double> vals(static_cast<std::size_t>(std::max(config.replications, 1)), top_mass);
    return aggregate_values(vals);
  }

  const auto spec = wcm_problem(inst);
  return replicate_transform<std::vector<std::uint8_t>>(
      spec, levels, config,
      [n, top_mass](const SsaRun& run) {
        double prod = 1.0;
        for (int t = 0; t < n; ++t) prod *= run.strata[t].R_hat;
        return prod * top_mass;
      },
      runs_out);
}

AggregateEstimate wcm_condexp(const WcmInstance& inst, const RunConfig& config,
                              std::optional<ApproximationTarget> target) {
  inst.validate();
  if (inst.gamma < 0)
    throw InvalidTarget("conditional expectation: no state satisfies a negative threshold");
  const std::size_t k = inst.k();
  std::size_t m = config.particles;
  if (target) m = hoeffding_m(inst.min_w(), inst.max_w(), target->eps, target->delta);

  const int spacing = std::max(config.burn_in, 1);
  const std::size_t burn = static_cast<std::size_t>(spacing) * k;

  // Lazy version of the flip chain. When gamma is large enough that no
  // proposal is ever rejected (gamma = total is the extreme case) the plain
  // Metropolis flip alternates the parity of the state deterministically, so
  // samples taken at a fixed even lag from a fixed start would only ever see
  // half the cube. Holding with probability 1/2 removes the periodicity and
  // keeps the uniform law stationary.
  auto lazy_step = [&inst](std::vector<std::uint8_t>& x, RngStream& rng) {
    if (rng.uniform01() < 0.5) x = bitflip_step(x, inst.w, inst.gamma, rng);
  };

  std::vector<double> per_rep(static_cast<std::size_t>(config.replications));
  for (int r = 0; r < config.replications; ++r) {
    RngStream rng(derive_seed(config.seed, kStreamChain, static_cast<std::uint64_t>(r)));
    std::vector<std::uint8_t> x(k, 0);  // the empty set is always feasible
    for (std::size_t i = 0; i < burn; ++i) lazy_step(x, rng);
    double sum = 0;
    for (std::size_t i = 0; i < m; ++i) {
      for (int j = 0; j < spacing; ++j) lazy_step(x, rng);
      sum += weight_sum(inst.w, x);
    }
    per_rep[static_cast<std::size_t>(r)] = sum / static_cast<double>(m);
  }
  return aggregate_values(per_rep);
}

double wcm_r_lower_bound(std::size_t k) {
  if (k == 0) throw std::invalid_argument("r lower bound: k must be positive");
  return 1.0 / (static_cast<double>(k) + 1.0);
}

}  // namespace ssa
