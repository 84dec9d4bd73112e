#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace ssa {

// (eps, delta) accuracy target: relative error eps with confidence 1 - delta
struct ApproximationTarget {
  double eps = 0;
  double delta = 0;
  void validate() const;  // eps > 0, delta in (0, 1)
};

// Per-level sampling plan for the independent-restart analysis: how accurate
// the kernel has to be (total-variation budget) and how many independent
// samples each level needs. The *_raw fields carry the un-ceiled bounds; the
// exact scaling laws (eps -> eps/2 quadruples the counts, and so on) hold on
// those.
struct LevelPlan {
  int t = 0;
  double tv_X = 0;
  std::uint64_t min_X = 0;
  double min_X_raw = 0;
  double tv_Z = 0;  // +inf when b_t == a_t (constant integrand needs nothing)
  std::uint64_t min_Z = 0;
  double min_Z_raw = 0;
};

// n levels, worst-case level conditional probability r_lower, per-level
// integrand ranges [a_t, b_t] with 0 < a_t <= b_t:
//   tv_X  = eps r / (32 n)            min_X = ceil(3072 n^2 ln(4 n^2 / delta) / (eps^2 r^2))
//   tv_Z  = eps a_t / (16 (b_t-a_t))  min_Z = ceil(128 (b_t-a_t)^2 ln(4 n / delta) / (eps^2 a_t^2))
std::vector<LevelPlan> epsdelta_samplesizes(const ApproximationTarget& target, std::size_t n,
                                            double r_lower, const std::vector<double>& a,
                                            const std::vector<double>& b);

// Hoeffding count for a mean in [a, b] with a > 0, run at TV budget
// eps a / (4 (b - a)): m = ceil((b-a)^2 ln(2/delta) / (2 (eps/4)^2 a^2))
std::uint64_t hoeffding_m(double a, double b, double eps, double delta);
double hoeffding_m_raw(double a, double b, double eps, double delta);
double hoeffding_tv(double a, double b, double eps);

// Chernoff count for a binary mean bounded below by p_lower, TV budget
// eps p_lower / 4: m = ceil(3 ln(2/delta) / ((eps/4)^2 p_lower^2))
std::uint64_t chernoff_m(double p_lower, double eps, double delta);
double chernoff_m_raw(double p_lower, double eps, double delta);
double chernoff_tv(double p_lower, double eps);

}  // namespace ssa
