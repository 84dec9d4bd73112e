#include "ssa/bounds.hpp"

#include <cmath>
#include <limits>

#include "ssa/errors.hpp"

namespace ssa {

void ApproximationTarget::validate() const {
  if (!(eps > 0)) throw InvalidTarget("accuracy target: eps must be positive");
  if (!(delta > 0 && delta < 1)) throw InvalidTarget("accuracy target: delta must lie in (0,1)");
}

namespace {

std::uint64_t ceil_count(double raw) {
  double c = std::ceil(raw);
  if (!(c >= 0) || c > 9.0e18) throw TooLarge("sample bound does not fit a 64-bit count");
  return static_cast<std::uint64_t>(c);
}

}  // namespace

std::vector<LevelPlan> epsdelta_samplesizes(const ApproximationTarget& target, std::size_t n,
                                            double r_lower, const std::vector<double>& a,
                                            const std::vector<double>& b) {
  target.validate();
  if (n == 0) throw InvalidRange("epsdelta_samplesizes: need at least one level");
  if (!(r_lower > 0 && r_lower <= 1))
    throw InvalidProbability("epsdelta_samplesizes: r_lower must lie in (0,1]");
  if (a.size() != n || b.size() != n)
    throw InvalidRange("epsdelta_samplesizes: need one [a,b] range per level");

  const double eps = target.eps, delta = target.delta;
  const double nd = static_cast<double>(n);
  const double tv_X = eps * r_lower / (32.0 * nd);
  const double min_X_raw = 3072.0 * nd * nd * std::log(4.0 * nd * nd / delta) / (eps * eps * r_lower * r_lower);
  const std::uint64_t min_X = ceil_count(min_X_raw);

  std::vector<LevelPlan> plan(n);
  for (std::size_t t = 0; t < n; ++t) {
    if (!(a[t] > 0)) throw InvalidRange("epsdelta_samplesizes: a_t must be positive");
    if (!(b[t] >= a[t])) throw InvalidRange("epsdelta_samplesizes: need b_t >= a_t");
    LevelPlan& p = plan[t];
    p.t = static_cast<int>(t) + 1;
    p.tv_X = tv_X;
    p.min_X = min_X;
    p.min_X_raw = min_X_raw;
    const double span = b[t] - a[t];
    if (span == 0) {
      p.tv_Z = std::numeric_limits<double>::infinity();  // constant integrand
      p.min_Z_raw = 0;
      p.min_Z = 0;
    } else {
      p.tv_Z = eps * a[t] / (16.0 * span);
      p.min_Z_raw = 128.0 * span * span * std::log(4.0 * nd / delta) / (eps * eps * a[t] * a[t]);
      p.min_Z = ceil_count(p.min_Z_raw);
    }
  }
  return plan;
}

double hoeffding_m_raw(double a, double b, double eps, double delta) {
  if (!(a > 0)) throw InvalidRange("hoeffding_m: a must be positive");
  if (!(b >= a)) throw InvalidRange("hoeffding_m: need b >= a");
  ApproximationTarget{eps, delta}.validate();
  const double q = eps / 4.0;
  return (b - a) * (b - a) * std::log(2.0 / delta) / (2.0 * q * q * a * a);
}

std::uint64_t hoeffding_m(double a, double b, double eps, double delta) {
  return ceil_count(hoeffding_m_raw(a, b, eps, delta));
}

double hoeffding_tv(double a, double b, double eps) {
  if (!(a > 0) || !(b > a)) throw InvalidRange("hoeffding_tv: need 0 < a < b");
  return eps * a / (4.0 * (b - a));
}

double chernoff_m_raw(double p_lower, double eps, double delta) {
  if (!(p_lower > 0 && p_lower <= 1))
    throw InvalidProbability("chernoff_m: p_lower must lie in (0,1]");
  ApproximationTarget{eps, delta}.validate();
  const double q = eps / 4.0;
  return 3.0 * std::log(2.0 / delta) / (q * q * p_lower * p_lower);
}

std::uint64_t chernoff_m(double p_lower, double eps, double delta) {
  return ceil_count(chernoff_m_raw(p_lower, eps, delta));
}

double chernoff_tv(double p_lower, double eps) {
  if (!(p_lower > 0 && p_lower <= 1))
    throw InvalidProbability("chernoff_tv: p_lower must lie in (0,1]");
  return eps * p_lower / 4.0;
}

}  // namespace ssa
