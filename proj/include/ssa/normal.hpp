#pragma once

namespace ssa {

// standard normal CDF
double normal_cdf(double x);

// inverse standard normal CDF, accurate to full double precision
// (rational initial guess plus one Halley refinement against erfc)
double inverse_normal_cdf(double p);

}  // namespace ssa
