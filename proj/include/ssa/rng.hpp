#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace ssa {

// splitmix64 mixing step, used to derive stream seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Logical sub-stream tags. Keying a stream by (root seed, tag, level, index)
// instead of by draw order makes runs reproducible no matter how the work is
// scheduled across threads.
enum : std::uint64_t {
  kStreamInit = 1,    // initial population draws
  kStreamAlloc = 2,   // splitting factor randomization
  kStreamKernel = 3,  // kernel transitions, keyed by (level, survivor index)
  kStreamRep = 4,     // per-replication root seeds
  kStreamSubrun = 5,  // independent-restart sub-runs
  kStreamPick = 6,    // representative choice within a sub-run
  kStreamPilot = 7,   // pilot pass
  kStreamChain = 8,   // standalone MCMC chains (conditional expectations)
};

// Counter-based derivation: same coordinates, same stream, always.
inline std::uint64_t derive_seed(std::uint64_t root, std::uint64_t tag,
                                 std::uint64_t a = 0, std::uint64_t b = 0) {
  std::uint64_t h = splitmix64(root ^ 0x6a09e667f3bcc908ULL);
  h = splitmix64(h ^ tag);
  h = splitmix64(h ^ a);
  h = splitmix64(h ^ b);
  return h;
}

// Random stream wrapping mt19937_64. The normal draw is stateless (no spare
// value cached) so the output sequence depends only on the calls made.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : gen_(seed) {}

  // uniform on [0, 1), 53-bit resolution
  double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // uniform on {0, ..., n-1}; modulo bias is below 2^-50 for any n we use
  std::uint64_t uniform_int(std::uint64_t n) { return gen_() % n; }

  // standard normal via Box-Muller, one value per call
  double normal() {
    double u1 = 1.0 - uniform01();  // (0, 1], keeps the log finite
    double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
  }

  double normal(double mean, double sd) { return mean + sd * normal(); }

  std::uint64_t raw() { return gen_(); }

 private:
  std::mt19937_64 gen_;
};

}  // namespace ssa
