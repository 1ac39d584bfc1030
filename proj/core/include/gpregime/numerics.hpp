#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <span>
#include <vector>

namespace gpregime::numerics {

inline constexpr double pi = std::numbers::pi;

/// sin(x)/x, stable near zero.
inline double sinc(double x) {
  if (std::abs(x) < 1e-4) {
    const double x2 = x * x;
    return 1.0 - x2 / 6.0 + x2 * x2 / 120.0;
  }
  return std::sin(x) / x;
}

std::vector<double> linspace(double a, double b, std::size_t n);
std::vector<double> logspace(double a, double b, std::size_t n);

using ScalarFn = std::function<double(double)>;

/// Composite 16-point Gauss-Legendre on `panels` equal sub-intervals of [a,b].
double integrate(const ScalarFn& f, double a, double b, std::size_t panels = 1);

/// Nodes and weights of a composite 16-point Gauss-Legendre rule.
struct QuadratureRule {
  std::vector<double> x;
  std::vector<double> w;
  void append(double a, double b);  ///< adds one panel [a, b]
};

QuadratureRule gauss_rule(double a, double b, std::size_t panels);
/// Panels [a, a + first], then widths growing by `growth`, truncated at b.
QuadratureRule geometric_rule(double a, double b, double first, double growth);

/// Composite Gauss-Legendre on geometrically growing panels starting at
/// [a, a + first] with ratio `growth`, truncated at b. Suited to integrands
/// that vary on a scale proportional to the distance from a.
double integrate_geometric(const ScalarFn& f, double a, double b, double first,
                           double growth = 1.5);

/// Adaptive Gauss-Kronrod; throws SolverFailure if the error estimate stays
/// above `tol` (relative) after `max_depth` bisections.
double integrate_adaptive(const ScalarFn& f, double a, double b, double tol = 1e-10,
                          unsigned max_depth = 20);

/// Composite Simpson on a uniform grid. `y.size()` must be odd.
double simpson(std::span<const double> y, double h);

/// Fourth-order central first derivative on a uniform grid (one-sided at ends).
std::vector<double> derivative4(std::span<const double> y, double h);
/// Fourth-order central second derivative on a uniform grid (one-sided at ends).
std::vector<double> second_derivative4(std::span<const double> y, double h);

/// Three-dimensional radial Fourier transform in the e^{-2 pi i p x}
/// convention restricted to the shell a <= r <= b:
///   4 pi \int_a^b f(r) r^2 sinc(2 pi p r) dr.
/// Panels are refined so each covers at most a quarter period of the kernel.
double radial_fourier_shell(const ScalarFn& f, double a, double b, double p,
                            std::size_t min_panels = 4);

/// Piecewise cubic Hermite interpolant through (x_i, y_i, y'_i).
class HermiteSpline {
 public:
  HermiteSpline() = default;
  HermiteSpline(std::vector<double> x, std::vector<double> y, std::vector<double> dy);

  double operator()(double x) const;
  double derivative(double x) const;

  double front() const { return x_.front(); }
  double back() const { return x_.back(); }
  const std::vector<double>& nodes() const { return x_; }
  const std::vector<double>& values() const { return y_; }
  const std::vector<double>& slopes() const { return dy_; }
  bool empty() const { return x_.empty(); }

 private:
  std::size_t locate(double x) const;

  std::vector<double> x_;
  std::vector<double> y_;
  std::vector<double> dy_;
};

}  // namespace gpregime::numerics
