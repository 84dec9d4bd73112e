#include "doctest.h"

#include <cmath>
#include <limits>
#include <vector>

#include "ssa/bounds.hpp"
#include "ssa/errors.hpp"

using namespace ssa;

TEST_CASE("accuracy target validation") {
  ApproximationTarget{0.1, 0.05}.validate();
  CHECK_THROWS_AS((ApproximationTarget{0.0, 0.05}.validate()), InvalidTarget);
  CHECK_THROWS_AS((ApproximationTarget{-0.1, 0.05}.validate()), InvalidTarget);
  CHECK_THROWS_AS((ApproximationTarget{0.1, 0.0}.validate()), InvalidTarget);
  CHECK_THROWS_AS((ApproximationTarget{0.1, 1.0}.validate()), InvalidTarget);
}

TEST_CASE("frozen reference counts") {
  // mean in [1,2], 10% relative error, 95% confidence
  CHECK(hoeffding_m(1.0, 2.0, 0.1, 0.05) == 2952);

  // binary mean at least 1/2, same target; the exact value of
  // 3 ln(40) / ((0.025)^2 (0.5)^2) is 70826.56..., so the ceiling is 70827
  CHECK(chernoff_m(0.5, 0.1, 0.05) == 70827);

  // two levels, r_lower 1/2: the per-level independent-sample requirement
  auto plan = epsdelta_samplesizes(ApproximationTarget{0.1, 0.05}, 2, 0.5,
                                   {1.0, 1.0}, {2.0, 2.0});
  REQUIRE(plan.size() == 2);
  CHECK(plan[0].min_X == 28352452);
  CHECK(plan[1].min_X == 28352452);
  CHECK(plan[0].min_Z == 64963);
  CHECK(plan[0].tv_X == doctest::Approx(0.1 * 0.5 / 64.0));
  CHECK(plan[0].tv_Z == doctest::Approx(0.1 / 16.0));
  CHECK(plan[0].t == 1);
  CHECK(plan[1].t == 2);
}

TEST_CASE("tv budgets") {
  CHECK(hoeffding_tv(1.0, 2.0, 0.1) == doctest::Approx(0.025));
  CHECK(chernoff_tv(0.5, 0.1) == doctest::Approx(0.0125));
  CHECK_THROWS_AS(hoeffding_tv(1.0, 1.0, 0.1), InvalidRange);
  CHECK_THROWS_AS(chernoff_tv(0.0, 0.1), InvalidProbability);
}

TEST_CASE("a constant integrand needs no stratum samples") {
  auto plan = epsdelta_samplesizes(ApproximationTarget{0.1, 0.05}, 1, 0.5, {3.0}, {3.0});
  CHECK(std::isinf(plan[0].tv_Z));
  CHECK(plan[0].min_Z == 0);
  CHECK(plan[0].min_Z_raw == 0.0);
  CHECK(plan[0].min_X > 0);
}

TEST_CASE("halving the error scales the raw counts by exactly four") {
  const double eps = 0.1, delta = 0.05;
  CHECK(hoeffding_m_raw(1.0, 2.0, eps / 2.0, delta) == 4.0 * hoeffding_m_raw(1.0, 2.0, eps, delta));
  CHECK(chernoff_m_raw(0.5, eps / 2.0, delta) == 4.0 * chernoff_m_raw(0.5, eps, delta));

  auto coarse = epsdelta_samplesizes(ApproximationTarget{eps, delta}, 3, 0.25, {1.0, 1.0, 1.0},
                                     {2.0, 3.0, 4.0});
  auto fine = epsdelta_samplesizes(ApproximationTarget{eps / 2.0, delta}, 3, 0.25, {1.0, 1.0, 1.0},
                                   {2.0, 3.0, 4.0});
  for (std::size_t t = 0; t < 3; ++t) {
    CHECK(fine[t].min_X_raw == 4.0 * coarse[t].min_X_raw);
    CHECK(fine[t].min_Z_raw == 4.0 * coarse[t].min_Z_raw);
    CHECK(fine[t].tv_X == coarse[t].tv_X / 2.0);
    CHECK(fine[t].tv_Z == coarse[t].tv_Z / 2.0);
  }
}

TEST_CASE("counts move the right way along each parameter") {
  const ApproximationTarget target{0.1, 0.05};

  // more levels demand more per-level samples and a tighter kernel budget
  auto small = epsdelta_samplesizes(target, 2, 0.5, {1.0, 1.0}, {2.0, 2.0});
  auto large = epsdelta_samplesizes(target, 5, 0.5, std::vector<double>(5, 1.0),
                                    std::vector<double>(5, 2.0));
  CHECK(large[0].min_X > small[0].min_X);
  CHECK(large[0].tv_X < small[0].tv_X);

  // a weaker conditional-probability floor also demands more
  auto weak = epsdelta_samplesizes(target, 2, 0.1, {1.0, 1.0}, {2.0, 2.0});
  CHECK(weak[0].min_X > small[0].min_X);

  // a wider integrand range inflates the stratum requirement
  auto wide = epsdelta_samplesizes(target, 2, 0.5, {1.0, 1.0}, {2.0, 5.0});
  CHECK(wide[1].min_Z > wide[0].min_Z);

  // Hoeffding and Chernoff counts grow when the job gets harder
  CHECK(hoeffding_m(1.0, 3.0, 0.1, 0.05) > hoeffding_m(1.0, 2.0, 0.1, 0.05));
  CHECK(hoeffding_m(1.0, 2.0, 0.05, 0.05) > hoeffding_m(1.0, 2.0, 0.1, 0.05));
  CHECK(hoeffding_m(1.0, 2.0, 0.1, 0.01) > hoeffding_m(1.0, 2.0, 0.1, 0.05));
  CHECK(chernoff_m(0.25, 0.1, 0.05) > chernoff_m(0.5, 0.1, 0.05));
}

TEST_CASE("bound input validation") {
  const ApproximationTarget target{0.1, 0.05};
  CHECK_THROWS_AS(epsdelta_samplesizes(target, 0, 0.5, {}, {}), InvalidRange);
  CHECK_THROWS_AS((epsdelta_samplesizes(target, 1, 0.0, {1.0}, {2.0})), InvalidProbability);
  CHECK_THROWS_AS((epsdelta_samplesizes(target, 1, 1.5, {1.0}, {2.0})), InvalidProbability);
  CHECK_THROWS_AS((epsdelta_samplesizes(target, 2, 0.5, {1.0}, {2.0, 2.0})), InvalidRange);
  CHECK_THROWS_AS((epsdelta_samplesizes(target, 1, 0.5, {0.0}, {2.0})), InvalidRange);
  CHECK_THROWS_AS((epsdelta_samplesizes(target, 1, 0.5, {2.0}, {1.0})), InvalidRange);
  CHECK_THROWS_AS(hoeffding_m(0.0, 1.0, 0.1, 0.05), InvalidRange);
  CHECK_THROWS_AS(hoeffding_m(2.0, 1.0, 0.1, 0.05), InvalidRange);
  CHECK_THROWS_AS(chernoff_m(1.5, 0.1, 0.05), InvalidProbability);

  // astronomically tight targets overflow the count and say so
  CHECK_THROWS_AS(chernoff_m(1e-8, 1e-4, 0.05), TooLarge);
}

TEST_CASE("min_Z frozen value cross-check") {
  // 128 (b-a)^2 ln(4n/delta) / (eps^2 a^2) at n = 2, [1,2]:
  // 128 ln(160) / 0.01 = 64962.3..., ceiling 64963
  auto plan = epsdelta_samplesizes(ApproximationTarget{0.1, 0.05}, 2, 0.5, {1.0, 2.0},
                                   {2.0, 2.0});
  CHECK(plan[0].min_Z == 64963);
  CHECK(plan[1].min_Z == 0);  // [2,2] is constant
}
