#include "ssa/engine.hpp"

#include <cmath>
#include <numeric>

namespace ssa {

std::vector<std::size_t> split_allocation(std::size_t survivors, std::size_t total,
                                          RngStream& rng) {
  if (survivors == 0) throw ZeroSurvivors("split_allocation: no survivors to split");
  std::vector<std::size_t> mult(survivors, total / survivors);
  std::size_t extra = total % survivors;
  // choose `extra` distinct survivors for the +1, uniformly (partial Fisher-Yates)
  std::vector<std::size_t> idx(survivors);
  std::iota(idx.begin(), idx.end(), 0);
  for (std::size_t i = 0; i < extra; ++i) {
    std::size_t j = i + rng.uniform_int(survivors - i);
    std::swap(idx[i], idx[j]);
    ++mult[idx[i]];
  }
  return mult;
}

StratumEstimates stratum_estimates(const std::vector<double>& phi_values,
                                   const std::vector<double>& r_hats) {
  if (r_hats.empty()) throw std::invalid_argument("stratum_estimates: no survivor fractions");
  StratumEstimates est;
  est.empty_stratum = phi_values.empty();
  if (!est.empty_stratum) {
    double sum = 0;
    for (double v : phi_values) sum += v;
    est.H_hat = sum / static_cast<double>(phi_values.size());
  }
  double prod = 1.0;
  for (std::size_t j = 0; j + 1 < r_hats.size(); ++j) prod *= r_hats[j];
  est.P_hat = (1.0 - r_hats.back()) * prod;
  est.C_hat = est.H_hat * est.P_hat;
  return est;
}

AggregateEstimate aggregate_values(const std::vector<double>& values) {
  AggregateEstimate agg;
  for (double v : values)
    if (!std::isnan(v)) agg.per_run.push_back(v);
  const std::size_t r = agg.per_run.size();
  if (r == 0) return agg;  // nothing defined: mean and re stay NaN
  double sum = 0;
  for (double v : agg.per_run) sum += v;
  agg.mean = sum / static_cast<double>(r);
  if (r < 2) return agg;  // re undefined with a single run
  double ss = 0;
  for (double v : agg.per_run) ss += (v - agg.mean) * (v - agg.mean);
  double sd = std::sqrt(ss / static_cast<double>(r - 1));
  agg.re = agg.mean == 0.0 ? std::numeric_limits<double>::infinity()
                           : sd / (std::abs(agg.mean) * std::sqrt(static_cast<double>(r)));
  return agg;
}

double percent_error(double estimate, double truth) {
  if (truth == 0.0) throw ZeroTruth("percent_error: truth is zero");
  return 100.0 * (estimate - truth) / truth;
}

}  // namespace ssa
