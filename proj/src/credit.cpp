#include "ssa/credit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>

#include "json.hpp"
#include "ssa/kernels.hpp"
#include "ssa/normal.hpp"

namespace ssa {

namespace {

double obligor_score(const Portfolio& pf, std::size_t i, const double* z, const double* eps) {
  double s = 0;
  for (std::size_t j = 0; j < pf.d; ++j) s += pf.loadings[i][j] * z[j];
  return s + pf.b[i] * eps[i];
}

// loss on the engine's flat state layout (z_1..z_d, eps_1..eps_k)
double flat_loss(const Portfolio& pf, const std::vector<double>& x) {
  const double* z = x.data();
  const double* eps = x.data() + pf.d;
  double total = 0;
  for (std::size_t i = 0; i < pf.k; ++i)
    if (obligor_score(pf, i, z, eps) > pf.thresholds[i]) total += pf.losses[i];
  return total;
}

void require_finalized(const Portfolio& pf) {
  if (pf.b.size() != pf.k || pf.thresholds.size() != pf.k)
    throw std::invalid_argument("portfolio: derived fields missing, call finalize() first");
}

}  // namespace

double Portfolio::total_loss() const {
  double s = 0;
  for (double l : losses) s += l;
  return s;
}

void Portfolio::finalize() {
  if (k == 0 || d == 0) throw std::invalid_argument("portfolio: k and d must be positive");
  if (loadings.size() != k || losses.size() != k || default_probs.size() != k)
    throw std::invalid_argument("portfolio: field lengths disagree with k");
  b.assign(k, 0.0);
  thresholds.assign(k, 0.0);
  for (std::size_t i = 0; i < k; ++i) {
    if (loadings[i].size() != d)
      throw std::invalid_argument("portfolio: loading row length disagrees with d");
    double norm2 = 0;
    for (double a : loadings[i]) norm2 += a * a;
    if (!(norm2 < 1.0)) throw std::invalid_argument("portfolio: loading row norm must be < 1");
    if (!(losses[i] > 0)) throw std::invalid_argument("portfolio: losses must be positive");
    const double p = default_probs[i];
    if (!(p > 0.0 && p < 1.0))
      throw std::invalid_argument("portfolio: default probabilities must lie in (0, 1)");
    b[i] = std::sqrt(1.0 - norm2);
    thresholds[i] = inverse_normal_cdf(1.0 - p);
  }
}

std::vector<std::uint8_t> default_indicators(const Portfolio& pf, const LatentState& s) {
  require_finalized(pf);
  std::vector<std::uint8_t> x(pf.k);
  for (std::size_t i = 0; i < pf.k; ++i)
    x[i] = obligor_score(pf, i, s.z.data(), s.eps.data()) > pf.thresholds[i] ? 1 : 0;
  return x;
}

double loss(const Portfolio& pf, const LatentState& s) {
  require_finalized(pf);
  double total = 0;
  for (std::size_t i = 0; i < pf.k; ++i)
    if (obligor_score(pf, i, s.z.data(), s.eps.data()) > pf.thresholds[i]) total += pf.losses[i];
  return total;
}

ProblemSpec<std::vector<double>> credit_problem(const Portfolio& pf) {
  require_finalized(pf);
  auto p = std::make_shared<const Portfolio>(pf);
  const std::size_t dim = pf.d + pf.k;

  ProblemSpec<std::vector<double>> spec;
  spec.dimension_descriptor = "latent factor space, dimension " + std::to_string(dim);
  spec.orientation = Orientation::SuperLevel;
  spec.initial_sampler = [dim](RngStream& rng) {
    std::vector<double> x(dim);
    for (auto& v : x) v = rng.normal();
    return x;
  };
  spec.performance = [p](const std::vector<double>& x) { return flat_loss(*p, x); };
  spec.integrand = [p](const std::vector<double>& x) { return flat_loss(*p, x); };
  spec.kernel_factory = [p](int, double threshold) -> TransitionKernel<std::vector<double>> {
    LevelConstraint c;
    c.threshold = threshold;
    c.orientation = Orientation::SuperLevel;
    c.performance = [p](const std::vector<double>& x) { return flat_loss(*p, x); };
    return [c](const std::vector<double>& x, RngStream& rng) {
      return hit_and_run_step(x, c, rng);
    };
  };
  return spec;
}

LevelSchedule credit_schedule(const Portfolio& pf, const std::vector<double>& mandatory,
                              const RunConfig& config, bool* stalled) {
  const auto spec = credit_problem(pf);
  PilotOptions opts;
  opts.base_level = 0.0;  // every loss is >= 0
  opts.terminal = 1.0 + pf.total_loss();
  opts.mandatory = mandatory;
  PilotResult res = pilot_levels(spec, config, opts, derive_seed(config.seed, kStreamPilot));
  if (stalled) *stalled = res.stalled;
  return res.schedule;
}

double tail_readout(const LevelSchedule& levels, const SsaRun& run, double v) {
  double mass = 0;
  for (std::size_t i = 0; i < run.strata.size(); ++i)
    if (levels.thresholds[i] >= v) mass += run.strata[i].P_hat;
  return mass;
}

std::vector<CvarRow> cvar_readout(const LevelSchedule& levels, const std::vector<SsaRun>& runs,
                                  const std::vector<double>& vars) {
  std::vector<CvarRow> rows;
  rows.reserve(vars.size());
  for (double v : vars) {
    std::vector<double> per;
    per.reserve(runs.size());
    for (const SsaRun& run : runs) {
      double num = 0, den = 0;
      for (std::size_t i = 0; i < run.strata.size(); ++i) {
        // thresholds[i] is the lower edge of stratum i + 1; v is one of the
        // schedule's thresholds, so this cut selects exactly {L >= v}
        if (levels.thresholds[i] >= v) {
          num += run.strata[i].C_hat;
          den += run.strata[i].P_hat;
        }
      }
      per.push_back(den > 0 ? num / den : std::numeric_limits<double>::quiet_NaN());
    }
    AggregateEstimate agg = aggregate_values(per);
    CvarRow row;
    row.v = v;
    row.c_hat = agg.mean;
    row.re = agg.re;
    row.empty_upper_strata = agg.per_run.empty();
    row.per_run = std::move(agg.per_run);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<CvarRow> cvar_multi(const Portfolio& pf, const std::vector<double>& vars,
                                const RunConfig& config, std::vector<SsaRun>* runs_out) {
  if (vars.empty()) throw std::invalid_argument("cvar: at least one level is required");
  if (!std::is_sorted(vars.begin(), vars.end()))
    throw std::invalid_argument("cvar: levels must be ascending");
  const auto spec = credit_problem(pf);
  const LevelSchedule levels = credit_schedule(pf, vars, config);

  std::vector<SsaRun> runs;
  runs.reserve(static_cast<std::size_t>(config.replications));
  for (int r = 0; r < config.replications; ++r) {
    const std::uint64_t rep_seed = derive_seed(config.seed, kStreamRep, static_cast<std::uint64_t>(r));
    runs.push_back(config.mode == Mode::Issa ? run_issa(spec, levels, config, rep_seed)
                                             : run_ssa(spec, levels, config, rep_seed));
  }

  std::vector<CvarRow> rows = cvar_readout(levels, runs, vars);
  if (runs_out)
    for (auto& run : runs) runs_out->push_back(std::move(run));
  return rows;
}

AggregateEstimate tail_prob(const Portfolio& pf, double v, const RunConfig& config,
                            std::vector<SsaRun>* runs_out) {
  require_finalized(pf);
  const std::size_t R = static_cast<std::size_t>(std::max(config.replications, 1));
  if (v <= 0) return aggregate_values(std::vector<double>(R, 1.0));
  if (v > pf.total_loss()) return aggregate_values(std::vector<double>(R, 0.0));

  const auto spec = credit_problem(pf);
  const LevelSchedule levels = credit_schedule(pf, {v}, config);
  return replicate_transform<std::vector<double>>(
      spec, levels, config,
      [&levels, v](const SsaRun& run) { return tail_readout(levels, run, v); }, runs_out);
}

Portfolio glasserman_li_portfolio(std::size_t k, std::size_t d, std::uint64_t seed) {
  if (k == 0 || d == 0) throw std::invalid_argument("portfolio generator: k and d must be positive");
  Portfolio pf;
  pf.k = k;
  pf.d = d;
  pf.default_probs.resize(k);
  pf.losses.resize(k);
  const double pi = std::acos(-1.0);
  for (std::size_t i = 1; i <= k; ++i) {
    const double di = static_cast<double>(i);
    const double dk = static_cast<double>(k);
    // the sine hits -1 exactly for some i/k ratios; keep p strictly positive
    pf.default_probs[i - 1] = std::max(0.01 * (1.0 + std::sin(16.0 * pi * di / dk)), 1e-8);
    const double group = std::ceil(5.0 * di / dk);
    pf.losses[i - 1] = group * group;
  }
  const double cap = 1.0 / std::sqrt(static_cast<double>(d));
  RngStream rng(derive_seed(seed, kStreamInit));
  pf.loadings.assign(k, std::vector<double>(d));
  for (auto& row : pf.loadings)
    for (auto& a : row) {
      double u;
      do {
        u = rng.uniform01();
      } while (u == 0.0);  // open interval keeps row norms strictly below 1
      a = u * cap;
    }
  pf.finalize();
  return pf;
}

Portfolio portfolio_from_json(const std::string& json_text) {
  const nlohmann::json j = nlohmann::json::parse(json_text);
  if (!j.is_object()) throw std::invalid_argument("portfolio: top-level JSON must be an object");

  if (j.contains("generator")) {
    for (const auto& item : j.items())
      if (item.key() != "generator")
        throw std::invalid_argument("portfolio: unknown key '" + item.key() + "'");
    const nlohmann::json& g = j.at("generator");
    if (!g.is_object()) throw std::invalid_argument("portfolio: generator must be an object");
    for (const auto& item : g.items())
      if (item.key() != "k" && item.key() != "d" && item.key() != "seed")
        throw std::invalid_argument("portfolio: unknown generator key '" + item.key() + "'");
    const std::size_t k = g.at("k").get<std::size_t>();
    const std::size_t d = g.at("d").get<std::size_t>();
    const std::uint64_t seed = g.contains("seed") ? g.at("seed").get<std::uint64_t>() : 1;
    return glasserman_li_portfolio(k, d, seed);
  }

  for (const auto& item : j.items())
    if (item.key() != "k" && item.key() != "d" && item.key() != "loadings" &&
        item.key() != "losses" && item.key() != "default_probs")
      throw std::invalid_argument("portfolio: unknown key '" + item.key() + "'");
  Portfolio pf;
  pf.k = j.at("k").get<std::size_t>();
  pf.d = j.at("d").get<std::size_t>();
  pf.loadings = j.at("loadings").get<std::vector<std::vector<double>>>();
  pf.losses = j.at("losses").get<std::vector<double>>();
  pf.default_probs = j.at("default_probs").get<std::vector<double>>();
  pf.finalize();
  return pf;
}

}  // namespace ssa
