#include "gpregime/slope.hpp"

#include <algorithm>
#include <cmath>

#include "gpregime/error.hpp"

namespace gpregime {
namespace {

SlopeFit ols_loglog(std::span<const double> x, std::span<const double> y) {
  require(x.size() == y.size(), ErrorKind::InvalidInput, "slope fit: x and y differ in length");
  require(x.size() >= 3, ErrorKind::InvalidInput, "slope fit needs at least 3 points");
  for (double v : x) require(v > 0.0, ErrorKind::InvalidInput, "slope fit needs positive x");

  SlopeFit fit;
  if (std::all_of(y.begin(), y.end(), [](double v) { return v == 0.0; })) {
    fit.trivial = true;
    return fit;
  }
  for (double v : y) {
    require(std::abs(v) > 0.0, ErrorKind::InvalidInput, "slope fit: mixed zero and non-zero y");
  }

  const auto n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]);
    const double ly = std::log(std::abs(y[i]));
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double denom = n * sxx - sx * sx;
  require(denom > 0.0, ErrorKind::InvalidInput, "slope fit: x values are all equal");
  fit.slope = (n * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / n;
  return fit;
}

}  // namespace

SlopeFit fit_slope(std::span<const double> x, std::span<const double> y, double expected,
                   double tol) {
  SlopeFit fit = ols_loglog(x, y);
  if (fit.trivial) {
    fit.slope = expected;
    fit.pass = true;
    return fit;
  }
  fit.pass = std::abs(fit.slope - expected) <= tol;
  return fit;
}

SlopeFit fit_slope_at_least(std::span<const double> x, std::span<const double> y,
                            double lower_bound) {
  SlopeFit fit = ols_loglog(x, y);
  if (fit.trivial) {
    fit.slope = lower_bound;
    fit.pass = true;
    return fit;
  }
  fit.pass = fit.slope >= lower_bound;
  return fit;
}

}  // namespace gpregime
