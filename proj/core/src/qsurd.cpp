#include "gpregime/qsurd.hpp"

#include <cmath>
#include <limits>
#include <numeric>

#include "gpregime/error.hpp"

namespace gpregime {

namespace {

using Int = boost::multiprecision::cpp_int;

// n = k^2 m with m squarefree
std::pair<std::uint64_t, std::uint64_t> split_square(std::uint64_t n) {
  std::uint64_t k = 1, m = 1;
  for (std::uint64_t p = 2; p * p <= n; ++p) {
    int e = 0;
    while (n % p == 0) {
      n /= p;
      ++e;
    }
    for (int i = 0; i < e / 2; ++i) k *= p;
    if (e % 2 == 1) m *= p;
  }
  m *= n;
  return {k, m};
}

}  // namespace

QSurd::QSurd(long value) {
  if (value != 0) terms_.emplace(1, Rational(value));
}

QSurd::QSurd(const Rational& value) {
  if (value != 0) terms_.emplace(1, value);
}

QSurd QSurd::sqrt_of(const Rational& q) {
  require(q >= 0, ErrorKind::InvalidParameter, "sqrt of a negative rational");
  QSurd out;
  if (q == 0) return out;
  // sqrt(a/b) = sqrt(a b) / b
  const Int num = boost::multiprecision::numerator(q);
  const Int den = boost::multiprecision::denominator(q);
  const Int prod = num * den;
  require(prod <= Int(std::numeric_limits<std::uint64_t>::max()), ErrorKind::ResourceLimit,
          "radicand too large for exact mode");
  const auto [k, m] = split_square(static_cast<std::uint64_t>(prod));
  out.terms_.emplace(m, Rational(Int(k), den));
  return out;
}

void QSurd::add_term(std::uint64_t radicand, const Rational& coeff) {
  if (coeff == 0) return;
  auto it = terms_.find(radicand);
  if (it == terms_.end()) {
    terms_.emplace(radicand, coeff);
    return;
  }
  it->second += coeff;
  if (it->second == 0) terms_.erase(it);
}

QSurd& QSurd::operator+=(const QSurd& o) {
  for (const auto& [m, c] : o.terms_) add_term(m, c);
  return *this;
}

QSurd& QSurd::operator-=(const QSurd& o) {
  for (const auto& [m, c] : o.terms_) add_term(m, -c);
  return *this;
}

QSurd operator*(const QSurd& a, const QSurd& b) {
  QSurd out;
  for (const auto& [m1, c1] : a.terms_)
    for (const auto& [m2, c2] : b.terms_) {
      // both squarefree: m1 m2 = g^2 (m1/g)(m2/g)
      const std::uint64_t g = std::gcd(m1, m2);
      out.add_term((m1 / g) * (m2 / g), c1 * c2 * g);
    }
  return out;
}

QSurd QSurd::operator-() const {
  QSurd out;
  for (const auto& [m, c] : terms_) out.terms_.emplace(m, -c);
  return out;
}

double QSurd::to_double() const {
  double s = 0.0;
  for (const auto& [m, c] : terms_) s += static_cast<double>(c) * std::sqrt(static_cast<double>(m));
  return s;
}

std::string QSurd::str() const {
  if (terms_.empty()) return "0";
  std::string s;
  for (const auto& [m, c] : terms_) {
    if (!s.empty()) s += " + ";
    s += c.str();
    if (m != 1) s += "*sqrt(" + std::to_string(m) + ")";
  }
  return s;
}

}  // namespace gpregime
