#pragma once

#include <cstdint>
#include <vector>

#include "ssa/credit.hpp"

// Independent reference implementations used only to validate estimates.
// Nothing here shares code with the estimators: performances, indicators and
// losses are recomputed from scratch, and the normal quantiles come from
// bisection rather than the closed-form inverse.
namespace ssa::oracle {

struct WcmExact {
  double tail = 0;
  double cond_exp = 0;
  bool cond_defined = false;  // false when no state satisfies the threshold
};

// Full enumeration of {0,1}^k; k <= 24, else TooLarge.
WcmExact wcm_enumerate(const std::vector<double>& w, double gamma);

// Depth-first counts of self-avoiding walks on Z^2; n <= 18, else TooLarge.
std::uint64_t saw_count_exact(int n);
double saw_delta_exact(int n);  // mean endpoint distance over the n-step SAWs

struct CmcResult {
  double tail = 0;
  double tail_se = 0;
  double cvar = 0;  // mean loss over the hitting samples
  double cvar_se = 0;
  std::uint64_t hits = 0;
  std::uint64_t samples = 0;
};

// Crude Monte Carlo for P(L >= v) and E[L | L >= v]. Refuses to report when
// fewer than 1000 samples hit the event (RefuseRareRegime), since the crude
// estimate is then worthless as a reference.
CmcResult credit_cmc(const Portfolio& pf, double v, std::uint64_t samples, std::uint64_t seed);

}  // namespace ssa::oracle
