#pragma once

#include <cstdint>
#include <map>
#include <string>

#include <boost/multiprecision/cpp_int.hpp>

namespace gpregime {

/// Exact element of Q(sqrt 2, sqrt 3, ...): a finite sum of rational
/// multiples of square roots of squarefree integers. Closed under +, -, *.
/// Enough for every matrix entry produced by ladder operators with the
/// sqrt((N - n)/N) dressing.
class QSurd {
 public:
  using Rational = boost::multiprecision::cpp_rational;

  QSurd() = default;
  QSurd(long value);  // NOLINT(google-explicit-constructor)
  explicit QSurd(const Rational& value);

  /// sqrt(q) for q >= 0.
  static QSurd sqrt_of(const Rational& q);

  QSurd& operator+=(const QSurd& o);
  QSurd& operator-=(const QSurd& o);
  friend QSurd operator+(QSurd a, const QSurd& b) { return a += b; }
  friend QSurd operator-(QSurd a, const QSurd& b) { return a -= b; }
  friend QSurd operator*(const QSurd& a, const QSurd& b);
  QSurd operator-() const;
  friend bool operator==(const QSurd& a, const QSurd& b) { return a.terms_ == b.terms_; }

  bool is_zero() const { return terms_.empty(); }
  double to_double() const;
  std::string str() const;

 private:
  void add_term(std::uint64_t radicand, const Rational& coeff);
  std::map<std::uint64_t, Rational> terms_;  // squarefree radicand -> coefficient
};

}  // namespace gpregime
