#include "ssa/oracles.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace ssa::oracle {

WcmExact wcm_enumerate(const std::vector<double>& w, double gamma) {
  const std::size_t k = w.size();
  if (k == 0) throw std::invalid_argument("enumeration: no weights");
  if (k > 24) throw TooLarge("enumeration: 2^k states exceed the k <= 24 budget");
  const std::uint64_t states = std::uint64_t{1} << k;
  std::uint64_t in_tail = 0;
  double weight_in_tail = 0;
  for (std::uint64_t mask = 0; mask < states; ++mask) {
    double s = 0;
    for (std::size_t i = 0; i < k; ++i)
      if (mask & (std::uint64_t{1} << i)) s += w[i];
    if (s <= gamma) {
      ++in_tail;
      weight_in_tail += s;
    }
  }
  WcmExact out;
  out.tail = static_cast<double>(in_tail) / static_cast<double>(states);
  out.cond_defined = in_tail > 0;
  out.cond_exp = out.cond_defined ? weight_in_tail / static_cast<double>(in_tail) : 0.0;
  return out;
}

namespace {

// plain depth-first enumeration on a (2n+1)^2 occupancy grid, origin centered
struct SawDfs {
  int n = 0;
  int side = 0;
  std::vector<char> used;
  std::uint64_t count = 0;
  double dist_sum = 0;

  explicit SawDfs(int n_) : n(n_), side(2 * n_ + 1), used(static_cast<std::size_t>(side) * side, 0) {}

  void run() {
    used[static_cast<std::size_t>(n) * side + n] = 1;
    descend(n, n, 0);
  }

  void descend(int x, int y, int depth) {
    if (depth == n) {
      ++count;
      const double ex = x - n, ey = y - n;
      dist_sum += std::sqrt(ex * ex + ey * ey);
      return;
    }
    static const int dx[4] = {1, -1, 0, 0};
    static const int dy[4] = {0, 0, 1, -1};
    for (int d = 0; d < 4; ++d) {
      const int nx = x + dx[d], ny = y + dy[d];
      char& cell = used[static_cast<std::size_t>(ny) * side + nx];
      if (cell) continue;
      cell = 1;
      descend(nx, ny, depth + 1);
      cell = 0;
    }
  }
};

SawDfs saw_dfs(int n) {
  if (n < 1) throw std::invalid_argument("saw enumeration: n must be at least 1");
  if (n > 18) throw TooLarge("saw enumeration: n > 18 exceeds the depth-first budget");
  SawDfs dfs(n);
  dfs.run();
  return dfs;
}

}  // namespace

std::uint64_t saw_count_exact(int n) { return saw_dfs(n).count; }

double saw_delta_exact(int n) {
  SawDfs dfs = saw_dfs(n);
  return dfs.dist_sum / static_cast<double>(dfs.count);
}

namespace {

double phi_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// quantile by bisection, deliberately sharing nothing with the closed-form
// inverse used by the estimators
double phi_quantile(double q) {
  double lo = -40, hi = 40;
  for (int i = 0; i < 120; ++i) {
    const double mid = 0.5 * (lo + hi);
    (phi_cdf(mid) < q ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

CmcResult credit_cmc(const Portfolio& pf, double v, std::uint64_t samples, std::uint64_t seed) {
  if (pf.k == 0 || pf.d == 0) throw std::invalid_argument("cmc: empty portfolio");
  if (samples == 0) throw std::invalid_argument("cmc: no samples requested");
  double total = 0;
  for (double l : pf.losses) total += l;
  if (v > total) throw RefuseRareRegime("cmc: the event is impossible, nothing to sample");

  // recompute the derived quantities from the primary fields
  std::vector<double> b(pf.k), x_thr(pf.k);
  for (std::size_t i = 0; i < pf.k; ++i) {
    double norm2 = 0;
    for (double a : pf.loadings[i]) norm2 += a * a;
    b[i] = std::sqrt(1.0 - norm2);
    x_thr[i] = phi_quantile(1.0 - pf.default_probs[i]);
  }

  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> z(pf.d), eps(pf.k);

  std::uint64_t hits = 0;
  double loss_sum = 0, loss_sq = 0;
  for (std::uint64_t s = 0; s < samples; ++s) {
    for (auto& zi : z) zi = normal(gen);
    for (auto& ei : eps) ei = normal(gen);
    double l = 0;
    for (std::size_t i = 0; i < pf.k; ++i) {
      double score = 0;
      for (std::size_t j = 0; j < pf.d; ++j) score += pf.loadings[i][j] * z[j];
      score += b[i] * eps[i];
      if (score > x_thr[i]) l += pf.losses[i];
    }
    if (l >= v) {
      ++hits;
      loss_sum += l;
      loss_sq += l * l;
    }
  }

  if (hits < 1000)
    throw RefuseRareRegime("cmc: fewer than 1000 hits, the crude reference is not trustworthy");

  CmcResult out;
  out.hits = hits;
  out.samples = samples;
  const double m = static_cast<double>(samples);
  const double h = static_cast<double>(hits);
  out.tail = h / m;
  out.tail_se = std::sqrt(out.tail * (1.0 - out.tail) / m);
  out.cvar = loss_sum / h;
  const double var = (loss_sq - h * out.cvar * out.cvar) / (h - 1.0);
  out.cvar_se = std::sqrt(std::max(var, 0.0) / h);
  return out;
}

}  // namespace ssa::oracle
