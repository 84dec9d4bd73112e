#include "doctest.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <limits>
#include <memory>
#include <vector>

#include "ssa/engine.hpp"

using namespace ssa;

namespace {

// Toy problem with everything analytically known: f = U(0,1), S(x) = x, and a
// kernel that resamples exactly from f restricted to {x >= threshold}. Lets
// the engine identities be checked without any Markov-chain error.
ProblemSpec<double> line_problem(double phi_const = 7.0) {
  ProblemSpec<double> spec;
  spec.dimension_descriptor = "unit interval";
  spec.orientation = Orientation::SuperLevel;
  spec.initial_sampler = [](RngStream& rng) { return rng.uniform01(); };
  spec.performance = [](const double& x) { return x; };
  spec.integrand = [phi_const](const double&) { return phi_const; };
  spec.kernel_factory = [](int, double threshold) -> TransitionKernel<double> {
    return [threshold](const double&, RngStream& rng) {
      return threshold + (1.0 - threshold) * rng.uniform01();
    };
  };
  return spec;
}

LevelSchedule line_levels(std::vector<double> thresholds) {
  LevelSchedule levels;
  levels.thresholds = std::move(thresholds);
  levels.orientation = Orientation::SuperLevel;
  levels.validate();
  return levels;
}

double prod_r(const SsaRun& run) {
  double p = 1.0;
  for (const auto& rec : run.strata) p *= rec.R_hat;
  return p;
}

double sum_p(const SsaRun& run) {
  double s = 0.0;
  for (const auto& rec : run.strata) s += rec.P_hat;
  return s;
}

}  // namespace

TEST_CASE("split allocation distributes N over the survivors") {
  RngStream rng(11);

  auto m = split_allocation(3, 10, rng);
  std::sort(m.begin(), m.end());
  CHECK(m == std::vector<std::size_t>{3, 3, 4});

  m = split_allocation(5, 5, rng);
  CHECK(m == std::vector<std::size_t>(5, 1));

  m = split_allocation(4, 10, rng);
  std::sort(m.begin(), m.end());
  CHECK(m == std::vector<std::size_t>{2, 2, 3, 3});

  // totals always add back up to N
  for (std::size_t surv : {1u, 2u, 7u, 99u}) {
    auto mm = split_allocation(surv, 1000, rng);
    std::size_t total = 0;
    for (auto v : mm) total += v;
    CHECK(total == 1000);
    CHECK(mm.size() == surv);
  }

  CHECK_THROWS_AS(split_allocation(0, 10, rng), ZeroSurvivors);
}

TEST_CASE("split allocation spreads the +1 uniformly") {
  // with 3 survivors and N=10 exactly one survivor gets the extra copy;
  // over many draws each index should get it about a third of the time
  RngStream rng(5);
  int hits[3] = {0, 0, 0};
  const int trials = 30000;
  for (int i = 0; i < trials; ++i) {
    auto m = split_allocation(3, 10, rng);
    for (int j = 0; j < 3; ++j)
      if (m[j] == 4) ++hits[j];
  }
  for (int j = 0; j < 3; ++j) {
    CHECK(hits[j] > trials / 3 - 600);
    CHECK(hits[j] < trials / 3 + 600);
  }
}

TEST_CASE("stratum estimates combine mean and reach probability") {
  auto est = stratum_estimates({2.0, 4.0}, {1.0, 0.5});
  CHECK(est.H_hat == doctest::Approx(3.0));
  CHECK(est.P_hat == doctest::Approx(0.5));
  CHECK(est.C_hat == doctest::Approx(1.5));
  CHECK_FALSE(est.empty_stratum);

  // deeper stratum: P = (1 - 0.4) * 1 * 0.5
  est = stratum_estimates({2.0, 4.0}, {1.0, 0.5, 0.4});
  CHECK(est.P_hat == doctest::Approx(0.3));

  // same without the leading R_0 = 1 convention
  est = stratum_estimates({2.0, 4.0}, {0.5, 0.4});
  CHECK(est.P_hat == doctest::Approx(0.3));

  // empty stratum contributes zero and is flagged
  est = stratum_estimates({}, {1.0, 0.5});
  CHECK(est.empty_stratum);
  CHECK(est.H_hat == 0.0);
  CHECK(est.C_hat == 0.0);

  CHECK_THROWS_AS(stratum_estimates({1.0}, {}), std::invalid_argument);
}

TEST_CASE("aggregate computes mean and relative error") {
  auto agg = aggregate_values({9.0, 10.0, 11.0});
  CHECK(agg.mean == doctest::Approx(10.0));
  CHECK(agg.re == doctest::Approx(1.0 / (10.0 * std::sqrt(3.0))));
  CHECK(agg.per_run.size() == 3);

  // single run: mean defined, re is not
  agg = aggregate_values({5.0});
  CHECK(agg.mean == 5.0);
  CHECK(std::isnan(agg.re));

  // NaN entries mark undefined runs and are dropped
  const double nan = std::numeric_limits<double>::quiet_NaN();
  agg = aggregate_values({nan, 4.0, 6.0});
  CHECK(agg.per_run.size() == 2);
  CHECK(agg.mean == doctest::Approx(5.0));

  agg = aggregate_values({nan, nan});
  CHECK(agg.per_run.empty());
  CHECK(std::isnan(agg.mean));

  // zero mean: relative error blows up instead of dividing by zero
  agg = aggregate_values({-1.0, 1.0});
  CHECK(std::isinf(agg.re));
}

TEST_CASE("percent error is signed and refuses a zero reference") {
  CHECK(percent_error(103.0, 100.0) == doctest::Approx(3.0));
  CHECK(percent_error(97.0, 100.0) == doctest::Approx(-3.0));
  CHECK(percent_error(100.0, 100.0) == 0.0);
  CHECK_THROWS_AS(percent_error(1.0, 0.0), ZeroTruth);
}

TEST_CASE("constant integrand is recovered almost exactly") {
  auto spec = line_problem(7.0);
  RunConfig config;
  config.particles = 300;
  config.burn_in = 2;
  config.seed = 20240601;

  // strata partition [0,1), so the P_hat telescope to 1 and the estimate
  // collapses to the constant up to floating point roundoff
  for (auto& levels : {line_levels({0.0, 0.5, 2.0}),
                       line_levels({0.0, 0.25, 0.5, 0.75, 2.0})}) {
    SsaRun run = run_ssa(spec, levels, config, 99);
    CHECK_FALSE(run.terminated_early);
    CHECK(run.estimate == doctest::Approx(7.0).epsilon(1e-12));
    CHECK(run.strata.back().R_hat == 0.0);
  }
}

TEST_CASE("stratum reach probabilities telescope against the survivor product") {
  auto spec = line_problem();
  spec.integrand = [](const double& x) { return x * x; };
  RunConfig config;
  config.particles = 500;
  config.burn_in = 3;
  config.seed = 7;

  auto levels = line_levels({0.0, 0.2, 0.4, 0.6, 0.8, 2.0});
  SsaRun run = run_ssa(spec, levels, config, 123);
  CHECK(std::abs(sum_p(run) - (1.0 - prod_r(run))) <= 1e-12);

  // estimate is the sum of stratum contributions, bit for bit
  double csum = 0.0;
  for (const auto& rec : run.strata) csum += rec.C_hat;
  CHECK(run.estimate == csum);

  for (const auto& rec : run.strata) {
    CHECK(rec.R_hat >= 0.0);
    CHECK(rec.R_hat <= 1.0);
    CHECK(rec.P_hat >= 0.0);
    CHECK(rec.P_hat <= 1.0);
    CHECK(rec.size_Z <= rec.size_X);
  }
}

TEST_CASE("doubling the integrand doubles every contribution exactly") {
  // a power-of-two scale factor makes the equivariance exact in floating point
  auto base = line_problem();
  base.integrand = [](const double& x) { return x + 0.25; };
  auto scaled = line_problem();
  scaled.integrand = [](const double& x) { return 2.0 * (x + 0.25); };

  RunConfig config;
  config.particles = 400;
  config.burn_in = 2;
  auto levels = line_levels({0.0, 0.3, 0.7, 2.0});

  SsaRun a = run_ssa(base, levels, config, 314);
  SsaRun b = run_ssa(scaled, levels, config, 314);
  REQUIRE(a.strata.size() == b.strata.size());
  for (std::size_t t = 0; t < a.strata.size(); ++t) {
    CHECK(a.strata[t].size_X == b.strata[t].size_X);
    CHECK(a.strata[t].size_Z == b.strata[t].size_Z);
    CHECK(a.strata[t].R_hat == b.strata[t].R_hat);
    CHECK(a.strata[t].P_hat == b.strata[t].P_hat);
    CHECK(2.0 * a.strata[t].H_hat == b.strata[t].H_hat);
    CHECK(2.0 * a.strata[t].C_hat == b.strata[t].C_hat);
  }
  CHECK(2.0 * a.estimate == b.estimate);
}

TEST_CASE("thread count never changes the result") {
  auto spec = line_problem();
  spec.integrand = [](const double& x) { return std::sin(3.0 * x); };
  auto levels = line_levels({0.0, 0.25, 0.5, 0.75, 2.0});

  RunConfig serial;
  serial.particles = 400;
  serial.burn_in = 3;
  serial.threads = 1;
  RunConfig wide = serial;
  wide.threads = 4;

  SsaRun a = run_ssa(spec, levels, serial, 2718);
  SsaRun b = run_ssa(spec, levels, wide, 2718);
  REQUIRE(a.strata.size() == b.strata.size());
  CHECK(a.estimate == b.estimate);
  for (std::size_t t = 0; t < a.strata.size(); ++t) {
    CHECK(a.strata[t].size_X == b.strata[t].size_X);
    CHECK(a.strata[t].size_Z == b.strata[t].size_Z);
    CHECK(a.strata[t].R_hat == b.strata[t].R_hat);
    CHECK(a.strata[t].H_hat == b.strata[t].H_hat);
    CHECK(a.strata[t].C_hat == b.strata[t].C_hat);
  }
  CHECK(a.log_level_products == b.log_level_products);

  SsaRun c = run_issa(spec, levels, serial, 321);
  SsaRun d = run_issa(spec, levels, wide, 321);
  CHECK(c.estimate == d.estimate);
}

TEST_CASE("running out of survivors ends the run gracefully") {
  auto spec = line_problem(7.0);
  RunConfig config;
  config.particles = 200;
  config.burn_in = 2;

  // nothing in [0,1) reaches 2, so the walk dies at the first threshold
  auto levels = line_levels({0.0, 2.0, 3.0});
  SsaRun run = run_ssa(spec, levels, config, 55);
  CHECK(run.terminated_early);
  REQUIRE(run.strata.size() == 2);
  CHECK(run.strata[0].R_hat == 0.0);
  CHECK(run.strata[0].P_hat == 1.0);
  CHECK(run.strata[1].empty_stratum);
  CHECK(run.strata[1].P_hat == 0.0);
  CHECK(run.estimate == 7.0);  // the single stratum holds everything
  CHECK(std::isinf(run.log_level_products[0]));
  CHECK(run.log_level_products[0] < 0.0);
}

TEST_CASE("run input validation") {
  auto spec = line_problem();
  auto levels = line_levels({0.0, 0.5, 2.0});
  RunConfig config;
  config.particles = 0;
  CHECK_THROWS_AS(run_ssa(spec, levels, config, 1), EmptyInitialSample);

  LevelSchedule bad;
  bad.thresholds = {0.0};
  CHECK_THROWS_AS(bad.validate(), NonPositiveLevels);
  bad.thresholds = {0.0, 0.5, 0.5};
  CHECK_THROWS_AS(bad.validate(), NonPositiveLevels);
  bad.thresholds = {0.0, 0.7, 0.3};
  CHECK_THROWS_AS(bad.validate(), NonPositiveLevels);
}

TEST_CASE("threshold merging respects orientation") {
  auto up = merge_thresholds({0.0, 5.0, 2.0}, {5.0, 7.0}, Orientation::SuperLevel);
  CHECK(up == std::vector<double>{0.0, 2.0, 5.0, 7.0});
  auto down = merge_thresholds({5.0, 1.0}, {3.0}, Orientation::SubLevel);
  CHECK(down == std::vector<double>{5.0, 3.0, 1.0});
}

TEST_CASE("restarted variant agrees on a single stratum and stays unbiased") {
  auto spec = line_problem();
  spec.integrand = [](const double& x) { return x; };
  RunConfig config;
  config.particles = 200;
  config.burn_in = 2;

  // one stratum: there is nothing to restart, both algorithms coincide
  auto flat = line_levels({0.0, 2.0});
  SsaRun a = run_ssa(spec, flat, config, 77);
  SsaRun b = run_issa(spec, flat, config, 77);
  CHECK(a.estimate == b.estimate);
  CHECK(a.strata.size() == b.strata.size());

  // multi-level: identities still hold per run, and the mean lands on
  // E[x] = 1/2 for x ~ U(0,1)
  auto levels = line_levels({0.0, 0.4, 0.8, 2.0});
  config.mode = Mode::Issa;
  config.replications = 60;
  AggregateEstimate agg;
  {
    std::vector<SsaRun> runs;
    agg = replicate(spec, levels, config, &runs);
    for (const auto& run : runs) {
      double csum = 0.0;
      for (const auto& rec : run.strata) csum += rec.C_hat;
      CHECK(run.estimate == csum);
      CHECK(std::abs(sum_p(run) - (1.0 - prod_r(run))) <= 1e-12);
    }
  }
  double se = agg.re * std::abs(agg.mean);
  CHECK(std::abs(agg.mean - 0.5) <= 4.0 * se + 1e-9);
}

TEST_CASE("replications stop once the error target is met") {
  auto spec = line_problem();
  spec.integrand = [](const double& x) { return x; };
  auto levels = line_levels({0.0, 0.5, 2.0});
  RunConfig config;
  config.particles = 100;
  config.burn_in = 2;
  config.replications = 4;

  auto agg = replicate_to_re<double>(
      spec, levels, config, [](const SsaRun& run) { return run.estimate; }, 0.02, 400);
  CHECK(agg.per_run.size() >= 2);
  CHECK(agg.per_run.size() <= 400);
  CHECK((agg.re <= 0.02 || agg.per_run.size() == 400));
  CHECK(agg.per_run.size() % 4 == 0);  // grows in whole batches
}

namespace {

// initial sampler handing out 1, 2, ..., N in order (threads = 1 keeps the
// order deterministic); with an identity kernel the pilot sees exactly the
// populations worked out by hand
ProblemSpec<double> counting_problem() {
  ProblemSpec<double> spec;
  spec.dimension_descriptor = "counter";
  spec.orientation = Orientation::SuperLevel;
  auto counter = std::make_shared<std::atomic<int>>(0);
  spec.initial_sampler = [counter](RngStream&) {
    return static_cast<double>(1 + counter->fetch_add(1));
  };
  spec.performance = [](const double& x) { return x; };
  spec.integrand = [](const double&) { return 1.0; };
  spec.kernel_factory = [](int, double) -> TransitionKernel<double> {
    return [](const double& x, RngStream&) { return x; };
  };
  return spec;
}

RunConfig pilot_config() {
  RunConfig config;
  config.particles = 10;
  config.burn_in = 1;
  config.rho = 0.2;
  config.threads = 1;
  return config;
}

}  // namespace

TEST_CASE("pilot picks the ceil(rho N)-th best performance") {
  // population {1..10}, rho = 0.2: the 2nd best value is 9; splitting the
  // survivors {9, 10} leaves 10 as the next candidate, after which the
  // population is all 10s and adaptation stalls
  PilotOptions opts;
  opts.base_level = 0.0;
  opts.terminal = 100.0;
  auto result = pilot_levels(counting_problem(), pilot_config(), opts, 31);
  CHECK(result.schedule.thresholds == std::vector<double>{0.0, 9.0, 10.0, 100.0});
  CHECK(result.stalled);
  CHECK(result.pilot_run.strata.size() == 3);
  result.schedule.validate();
}

TEST_CASE("pilot never steps past a mandatory threshold") {
  PilotOptions opts;
  opts.base_level = 0.0;
  opts.terminal = 100.0;
  opts.mandatory = {7.0, 5.0};  // order should not matter
  auto result = pilot_levels(counting_problem(), pilot_config(), opts, 31);
  const auto& th = result.schedule.thresholds;
  REQUIRE(th.size() >= 5);
  CHECK(th[0] == 0.0);
  // the first adaptive candidate is 9, so both mandatory levels clamp it
  CHECK(th[1] == 5.0);
  CHECK(th[2] == 7.0);
  CHECK(th.back() == 100.0);
  CHECK(std::is_sorted(th.begin(), th.end()));
  CHECK(std::adjacent_find(th.begin(), th.end()) == th.end());  // no duplicates
  CHECK(std::count(th.begin(), th.end(), 5.0) == 1);
  CHECK(std::count(th.begin(), th.end(), 7.0) == 1);
  result.schedule.validate();
}

TEST_CASE("pilot absorbs a mandatory threshold equal to the candidate") {
  PilotOptions opts;
  opts.base_level = 0.0;
  opts.terminal = 100.0;
  opts.mandatory = {9.0};  // coincides with the first adaptive candidate
  auto result = pilot_levels(counting_problem(), pilot_config(), opts, 31);
  CHECK(result.schedule.thresholds == std::vector<double>{0.0, 9.0, 10.0, 100.0});
  result.schedule.validate();
}

TEST_CASE("pilot appends unreached mandatory levels before the terminal") {
  // adaptation stalls at 10, yet 40 and 60 still have to appear
  PilotOptions opts;
  opts.base_level = 0.0;
  opts.terminal = 100.0;
  opts.mandatory = {40.0, 60.0};
  auto result = pilot_levels(counting_problem(), pilot_config(), opts, 31);
  const auto& th = result.schedule.thresholds;
  CHECK(result.stalled);
  CHECK(std::count(th.begin(), th.end(), 40.0) == 1);
  CHECK(std::count(th.begin(), th.end(), 60.0) == 1);
  CHECK(th.back() == 100.0);
  result.schedule.validate();
}

TEST_CASE("pilot validates its bracket") {
  PilotOptions opts;
  opts.base_level = 0.0;
  opts.terminal = 0.0;
  CHECK_THROWS_AS(pilot_levels(counting_problem(), pilot_config(), opts, 1),
                  NonPositiveLevels);
}

TEST_CASE("pilot stays deterministic across thread counts") {
  auto spec = line_problem();
  RunConfig serial;
  serial.particles = 300;
  serial.burn_in = 2;
  serial.rho = 0.25;
  serial.threads = 1;
  RunConfig wide = serial;
  wide.threads = 4;

  PilotOptions opts;
  opts.base_level = 0.0;
  opts.terminal = 2.0;
  auto a = pilot_levels(spec, serial, opts, 88);
  auto b = pilot_levels(spec, wide, opts, 88);
  CHECK(a.schedule.thresholds == b.schedule.thresholds);
  CHECK(a.stalled == b.stalled);
  CHECK(a.pilot_run.estimate == b.pilot_run.estimate);
}
