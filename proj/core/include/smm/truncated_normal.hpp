#pragma once

namespace smm {

/// exp(x^2) erfc(x) for x >= 0, accurate in the far tail where erfc underflows.
double erfcx(double x);

/// Normalizer and first two moments of a density proportional to
/// exp(-precision/2 (t - center)^2) restricted to t in [0, 1].
struct UnitIntervalMoments {
  double log_integral = 0.0;  ///< log of the integral over [0, 1]
  double mean = 0.5;
  double second_moment = 1.0 / 3.0;
};

/// Requires precision > 0.
UnitIntervalMoments gaussian_on_unit_interval(double center, double precision);

/// Same for a density proportional to exp(slope t) on [0, 1].
UnitIntervalMoments exponential_on_unit_interval(double slope);

/// Same for exp(slope t - precision t^2 / 2), as a series in precision
/// around the exponential case. Intended for precision <= 2.
UnitIntervalMoments weakly_curved_on_unit_interval(double slope, double precision);

}  // namespace smm
