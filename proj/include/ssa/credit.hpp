#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ssa/engine.hpp"

namespace ssa {

// Factor-model credit portfolio. Obligor i defaults when
//   a_i . z + b_i eps_i > x_i      (strict inequality)
// with z in R^d and eps in R^k both standard normal, b_i = sqrt(1 - |a_i|^2)
// and x_i the (1 - p_i)-quantile of the standard normal. The portfolio loss
// is L = sum_i l_i 1{default_i}.
struct Portfolio {
  std::size_t k = 0, d = 0;
  std::vector<std::vector<double>> loadings;  // k rows of length d, row norms < 1
  std::vector<double> losses;                 // l_i > 0
  std::vector<double> default_probs;          // p_i in (0, 1)
  std::vector<double> b;                      // derived idiosyncratic weights
  std::vector<double> thresholds;             // derived default thresholds x_i

  double total_loss() const;
  void finalize();  // validates and fills the derived fields
};

struct LatentState {
  std::vector<double> z;    // systematic factors, length d
  std::vector<double> eps;  // idiosyncratic noise, length k
};

std::vector<std::uint8_t> default_indicators(const Portfolio& pf, const LatentState& s);
double loss(const Portfolio& pf, const LatentState& s);

// Engine-facing problem on the flat latent vector (z_1..z_d, eps_1..eps_k):
// iid normal initial draws, hit-and-run kernel per level, integrand = loss.
ProblemSpec<std::vector<double>> credit_problem(const Portfolio& pf);

// Frozen schedule from one pilot pass: base level 0, terminal 1 + sum(l),
// the given thresholds merged in as mandatory levels.
LevelSchedule credit_schedule(const Portfolio& pf, const std::vector<double>& mandatory,
                              const RunConfig& config, bool* stalled = nullptr);

struct CvarRow {
  double v = 0;
  double c_hat = 0;              // mean of the per-run conditional expectations
  double re = 0;
  std::vector<double> per_run;   // defined runs only
  bool empty_upper_strata = false;  // no run ever placed mass above v
};

// Readouts over completed runs. The cut keeps the strata whose lower edge is
// at or above v, which is exact whenever v appears in the schedule.
double tail_readout(const LevelSchedule& levels, const SsaRun& run, double v);
std::vector<CvarRow> cvar_readout(const LevelSchedule& levels, const std::vector<SsaRun>& runs,
                                  const std::vector<double>& vars);

// Conditional expectations E[L | L >= v_j] for every v_j from a single
// schedule: per run, the ratio of sum C_hat to sum P_hat over the strata at
// or above v_j. All rows come from the same R runs.
std::vector<CvarRow> cvar_multi(const Portfolio& pf, const std::vector<double>& vars,
                                const RunConfig& config, std::vector<SsaRun>* runs_out = nullptr);

// P(L >= v): sum of P_hat over the strata at or above v. v <= 0 and
// v > sum(l) short-circuit to the exact answers 1 and 0.
AggregateEstimate tail_prob(const Portfolio& pf, double v, const RunConfig& config,
                            std::vector<SsaRun>* runs_out = nullptr);

// Synthetic benchmark family: p_i = 0.01 (1 + sin(16 pi i / k)), losses
// (ceil(5i/k))^2, loadings uniform on (0, 1/sqrt(d)).
Portfolio glasserman_li_portfolio(std::size_t k, std::size_t d, std::uint64_t seed);

// Parse a portfolio from JSON text: either the explicit arrays
// {"k","d","loadings","losses","default_probs"} or {"generator":{"k","d","seed"}}.
Portfolio portfolio_from_json(const std::string& json_text);

}  // namespace ssa
