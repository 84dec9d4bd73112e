#include "ssa/kernels.hpp"

#include <cmath>

#include "ssa/errors.hpp"

namespace ssa {

std::vector<double> hit_and_run_step(const std::vector<double>& x,
                                     const LevelConstraint& constraint, RngStream& rng) {
  const std::size_t dim = x.size();
  std::vector<double> dir(dim);
  double norm2 = 0;
  do {
    norm2 = 0;
    for (std::size_t i = 0; i < dim; ++i) {
      dir[i] = rng.normal();
      norm2 += dir[i] * dir[i];
    }
  } while (norm2 == 0.0);
  const double inv = 1.0 / std::sqrt(norm2);
  double proj = 0;
  for (std::size_t i = 0; i < dim; ++i) {
    dir[i] *= inv;
    proj += x[i] * dir[i];
  }

  std::vector<double> y(dim);
  for (int attempt = 0; attempt < 100; ++attempt) {
    double lambda = rng.normal(-proj, 1.0);
    for (std::size_t i = 0; i < dim; ++i) y[i] = x[i] + lambda * dir[i];
    if (constraint.admits(y)) return y;
  }
  return x;  // every proposal left the set; keep the current point
}

std::vector<std::uint8_t> bitflip_apply(const std::vector<std::uint8_t>& x,
                                        const std::vector<double>& w, double b, std::size_t i) {
  double s = 0;
  for (std::size_t j = 0; j < x.size(); ++j)
    if (x[j]) s += w[j];
  if (s > b) throw InfeasibleState("bitflip: input state violates the constraint");
  double flipped = x[i] ? s - w[i] : s + w[i];
  if (flipped > b) return x;  // proposal leaves the set, stay
  std::vector<std::uint8_t> y = x;
  y[i] ^= 1;
  return y;
}

std::vector<std::uint8_t> bitflip_step(const std::vector<std::uint8_t>& x,
                                       const std::vector<double>& w, double b, RngStream& rng) {
  return bitflip_apply(x, w, b, rng.uniform_int(x.size()));
}

}  // namespace ssa
