#pragma once

#include <span>

namespace gpregime {

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;  ///< log-space intercept
  bool pass = false;
  bool trivial = false;  ///< all y were zero; slope set to the expected value
};

/// Ordinary least squares of log y against log x. Passes iff
/// |slope - expected| <= tol. Needs at least three points with x > 0; an
/// all-zero series is reported as a trivial pass.
SlopeFit fit_slope(std::span<const double> x, std::span<const double> y, double expected,
                   double tol);

/// Same fit, but passes iff slope >= lower_bound (one-sided scaling claims).
SlopeFit fit_slope_at_least(std::span<const double> x, std::span<const double> y,
                            double lower_bound);

}  // namespace gpregime
