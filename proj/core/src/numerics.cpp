#include "gpregime/numerics.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <string>

#include "gpregime/error.hpp"

namespace gpregime::numerics {

std::vector<double> linspace(double a, double b, std::size_t n) {
  std::vector<double> out(n);
  if (n == 1) {
    out[0] = a;
    return out;
  }
  const double h = (b - a) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) out[i] = a + h * static_cast<double>(i);
  out.back() = b;
  return out;
}

std::vector<double> logspace(double a, double b, std::size_t n) {
  auto out = linspace(std::log(a), std::log(b), n);
  for (auto& v : out) v = std::exp(v);
  return out;
}

double integrate(const ScalarFn& f, double a, double b, std::size_t panels) {
  using Gauss = boost::math::quadrature::gauss<double, 16>;
  if (b <= a) return 0.0;
  panels = std::max<std::size_t>(panels, 1);
  const double h = (b - a) / static_cast<double>(panels);
  double sum = 0.0;
  for (std::size_t k = 0; k < panels; ++k) {
    const double lo = a + h * static_cast<double>(k);
    sum += Gauss::integrate(f, lo, k + 1 == panels ? b : lo + h);
  }
  return sum;
}

void QuadratureRule::append(double a, double b) {
  using Gauss = boost::math::quadrature::gauss<double, 16>;
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const auto& nodes = Gauss::abscissa();
  const auto& weights = Gauss::weights();
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const double t = nodes[i];
    const double wt = weights[i];
    if (t == 0.0) {
      x.push_back(mid);
      w.push_back(half * wt);
      continue;
    }
    x.push_back(mid - half * t);
    w.push_back(half * wt);
    x.push_back(mid + half * t);
    w.push_back(half * wt);
  }
}

QuadratureRule gauss_rule(double a, double b, std::size_t panels) {
  QuadratureRule rule;
  if (b <= a) return rule;
  panels = std::max<std::size_t>(panels, 1);
  const double h = (b - a) / static_cast<double>(panels);
  for (std::size_t k = 0; k < panels; ++k) {
    const double lo = a + h * static_cast<double>(k);
    rule.append(lo, k + 1 == panels ? b : lo + h);
  }
  return rule;
}

QuadratureRule geometric_rule(double a, double b, double first, double growth) {
  QuadratureRule rule;
  double lo = a;
  double width = first;
  while (lo < b) {
    const double hi = std::min(b, lo + width);
    rule.append(lo, hi);
    lo = hi;
    width *= growth;
  }
  return rule;
}

double integrate_geometric(const ScalarFn& f, double a, double b, double first, double growth) {
  using Gauss = boost::math::quadrature::gauss<double, 16>;
  double sum = 0.0;
  double lo = a;
  double width = first;
  while (lo < b) {
    const double hi = std::min(b, lo + width);
    sum += Gauss::integrate(f, lo, hi);
    lo = hi;
    width *= growth;
  }
  return sum;
}

double integrate_adaptive(const ScalarFn& f, double a, double b, double tol, unsigned max_depth) {
  if (b <= a) return 0.0;
  double error = 0.0;
  const double value =
      boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, max_depth, tol, &error);
  const double scale = std::max(std::abs(value), 1e-300);
  if (!std::isfinite(value) || error > 1e3 * tol * scale + 1e-300) {
    fail(ErrorKind::SolverFailure,
         "adaptive quadrature did not converge on [" + std::to_string(a) + ", " +
             std::to_string(b) + "]",
         error);
  }
  return value;
}

double simpson(std::span<const double> y, double h) {
  const std::size_t n = y.size();
  if (n < 3 || n % 2 == 0) fail(ErrorKind::InvalidInput, "simpson needs an odd sample count >= 3");
  double sum = y[0] + y[n - 1];
  for (std::size_t i = 1; i + 1 < n; ++i) sum += (i % 2 ? 4.0 : 2.0) * y[i];
  return sum * h / 3.0;
}

std::vector<double> derivative4(std::span<const double> y, double h) {
  const std::size_t n = y.size();
  std::vector<double> d(n, 0.0);
  if (n < 5) fail(ErrorKind::InvalidInput, "derivative4 needs at least 5 samples");
  for (std::size_t i = 2; i + 2 < n; ++i)
    d[i] = (y[i - 2] - 8.0 * y[i - 1] + 8.0 * y[i + 1] - y[i + 2]) / (12.0 * h);
  auto fwd = [&](std::size_t i) {
    return (-25.0 * y[i] + 48.0 * y[i + 1] - 36.0 * y[i + 2] + 16.0 * y[i + 3] - 3.0 * y[i + 4]) /
           (12.0 * h);
  };
  auto bwd = [&](std::size_t i) {
    return (25.0 * y[i] - 48.0 * y[i - 1] + 36.0 * y[i - 2] - 16.0 * y[i - 3] + 3.0 * y[i - 4]) /
           (12.0 * h);
  };
  d[0] = fwd(0);
  d[1] = fwd(1);
  d[n - 1] = bwd(n - 1);
  d[n - 2] = bwd(n - 2);
  return d;
}

std::vector<double> second_derivative4(std::span<const double> y, double h) {
  const std::size_t n = y.size();
  std::vector<double> d(n, 0.0);
  if (n < 7) fail(ErrorKind::InvalidInput, "second_derivative4 needs at least 7 samples");
  const double h2 = h * h;
  for (std::size_t i = 2; i + 2 < n; ++i)
    d[i] = (-y[i - 2] + 16.0 * y[i - 1] - 30.0 * y[i] + 16.0 * y[i + 1] - y[i + 2]) / (12.0 * h2);
  auto fwd = [&](std::size_t i) {
    return (45.0 * y[i] - 154.0 * y[i + 1] + 214.0 * y[i + 2] - 156.0 * y[i + 3] +
            61.0 * y[i + 4] - 10.0 * y[i + 5]) /
           (12.0 * h2);
  };
  auto bwd = [&](std::size_t i) {
    return (45.0 * y[i] - 154.0 * y[i - 1] + 214.0 * y[i - 2] - 156.0 * y[i - 3] +
            61.0 * y[i - 4] - 10.0 * y[i - 5]) /
           (12.0 * h2);
  };
  d[0] = fwd(0);
  d[1] = fwd(1);
  d[n - 1] = bwd(n - 1);
  d[n - 2] = bwd(n - 2);
  return d;
}

double radial_fourier_shell(const ScalarFn& f, double a, double b, double p,
                            std::size_t min_panels) {
  if (b <= a) return 0.0;
  const double omega = 2.0 * pi * std::abs(p);
  const auto periods = static_cast<std::size_t>(std::ceil(omega * (b - a) / (0.5 * pi)));
  const std::size_t panels = std::max(min_panels, periods);
  auto integrand = [&](double r) { return f(r) * r * r * sinc(omega * r); };
  return 4.0 * pi * integrate(integrand, a, b, panels);
}

HermiteSpline::HermiteSpline(std::vector<double> x, std::vector<double> y, std::vector<double> dy)
    : x_(std::move(x)), y_(std::move(y)), dy_(std::move(dy)) {
  if (x_.size() < 2 || y_.size() != x_.size() || dy_.size() != x_.size())
    fail(ErrorKind::InvalidInput, "HermiteSpline needs matching arrays of length >= 2");
}

std::size_t HermiteSpline::locate(double x) const {
  auto it = std::upper_bound(x_.begin(), x_.end(), x);
  std::size_t i = it == x_.begin() ? 0 : static_cast<std::size_t>(it - x_.begin()) - 1;
  return std::min(i, x_.size() - 2);
}

double HermiteSpline::operator()(double x) const {
  const std::size_t i = locate(x);
  const double h = x_[i + 1] - x_[i];
  const double t = (x - x_[i]) / h;
  const double t2 = t * t;
  const double t3 = t2 * t;
  const double h00 = 2 * t3 - 3 * t2 + 1;
  const double h10 = t3 - 2 * t2 + t;
  const double h01 = -2 * t3 + 3 * t2;
  const double h11 = t3 - t2;
  return h00 * y_[i] + h10 * h * dy_[i] + h01 * y_[i + 1] + h11 * h * dy_[i + 1];
}

double HermiteSpline::derivative(double x) const {
  const std::size_t i = locate(x);
  const double h = x_[i + 1] - x_[i];
  const double t = (x - x_[i]) / h;
  const double t2 = t * t;
  const double d00 = (6 * t2 - 6 * t) / h;
  const double d10 = 3 * t2 - 4 * t + 1;
  const double d01 = (-6 * t2 + 6 * t) / h;
  const double d11 = 3 * t2 - 2 * t;
  return d00 * y_[i] + d10 * dy_[i] + d01 * y_[i + 1] + d11 * dy_[i + 1];
}

}  // namespace gpregime::numerics
