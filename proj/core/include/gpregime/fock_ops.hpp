#pragma once

#include <complex>
#include <map>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "gpregime/fock_space.hpp"
#include "gpregime/qsurd.hpp"

namespace gpregime::fock {

using Complex = std::complex<double>;

/// Scalar hooks shared by the float (complex<double>) and exact (QSurd) modes.
template <class T>
struct Scalar;

template <>
struct Scalar<Complex> {
  static Complex sqrt_ratio(long num, long den) {
    return {std::sqrt(static_cast<double>(num) / static_cast<double>(den)), 0.0};
  }
  static Complex from_int(long v) { return {static_cast<double>(v), 0.0}; }
  static bool is_zero(const Complex& v) { return v == Complex{}; }
  static double abs(const Complex& v) { return std::abs(v); }
  static Complex conj(const Complex& v) { return std::conj(v); }
};

template <>
struct Scalar<QSurd> {
  static QSurd sqrt_ratio(long num, long den) { return QSurd::sqrt_of(QSurd::Rational(num, den)); }
  static QSurd from_int(long v) { return QSurd(v); }
  static bool is_zero(const QSurd& v) { return v.is_zero(); }
  static double abs(const QSurd& v) { return std::abs(v.to_double()); }
  static QSurd conj(const QSurd& v) { return v; }
};

/// Row-major sparse matrix with exact zero pruning.
template <class T>
class SparseOp {
 public:
  explicit SparseOp(std::size_t n = 0) : rows_(n) {}

  static SparseOp identity(std::size_t n) {
    SparseOp out(n);
    for (std::size_t i = 0; i < n; ++i) out.add(i, i, Scalar<T>::from_int(1));
    return out;
  }

  std::size_t dim() const { return rows_.size(); }
  const std::map<std::size_t, T>& row(std::size_t i) const { return rows_[i]; }

  void add(std::size_t i, std::size_t j, const T& v) {
    if (Scalar<T>::is_zero(v)) return;
    auto& r = rows_.at(i);
    auto it = r.find(j);
    if (it == r.end()) {
      r.emplace(j, v);
      return;
    }
    it->second += v;
    if (Scalar<T>::is_zero(it->second)) r.erase(it);
  }

  T at(std::size_t i, std::size_t j) const {
    const auto it = rows_.at(i).find(j);
    return it == rows_[i].end() ? T{} : it->second;
  }

  SparseOp& operator+=(const SparseOp& o) {
    for (std::size_t i = 0; i < o.dim(); ++i)
      for (const auto& [j, v] : o.rows_[i]) add(i, j, v);
    return *this;
  }
  SparseOp& operator-=(const SparseOp& o) {
    for (std::size_t i = 0; i < o.dim(); ++i)
      for (const auto& [j, v] : o.rows_[i]) add(i, j, -v);
    return *this;
  }
  friend SparseOp operator+(SparseOp a, const SparseOp& b) { return a += b; }
  friend SparseOp operator-(SparseOp a, const SparseOp& b) { return a -= b; }

  friend SparseOp operator*(const SparseOp& a, const SparseOp& b) {
    SparseOp out(a.dim());
    for (std::size_t i = 0; i < a.dim(); ++i)
      for (const auto& [k, x] : a.rows_[i])
        for (const auto& [j, y] : b.rows_[k]) out.add(i, j, x * y);
    return out;
  }
  friend SparseOp operator*(const T& s, const SparseOp& a) {
    SparseOp out(a.dim());
    if (Scalar<T>::is_zero(s)) return out;
    for (std::size_t i = 0; i < a.dim(); ++i)
      for (const auto& [j, v] : a.rows_[i]) out.add(i, j, s * v);
    return out;
  }

  SparseOp adjoint() const {
    SparseOp out(dim());
    for (std::size_t i = 0; i < dim(); ++i)
      for (const auto& [j, v] : rows_[i]) out.add(j, i, Scalar<T>::conj(v));
    return out;
  }

  double max_abs() const {
    double m = 0.0;
    for (const auto& r : rows_)
      for (const auto& [j, v] : r) m = std::max(m, Scalar<T>::abs(v));
    return m;
  }
  bool exactly_zero() const {
    for (const auto& r : rows_)
      if (!r.empty()) return false;
    return true;
  }

 private:
  std::vector<std::map<std::size_t, T>> rows_;
};

template <class T>
SparseOp<T> commutator(const SparseOp<T>& a, const SparseOp<T>& b) {
  return a * b - b * a;
}

/// Operator on a FockSpace. `offset` is the change in total occupation it
/// induces (0 for number-conserving operators, +-1 for ladders, and
/// kMixedOffset when it mixes sectors).
template <class T>
struct FockOperator {
  std::shared_ptr<const FockSpace> space;
  SparseOp<T> matrix;
  bool hermitian = false;
  int offset = 0;
};

inline constexpr int kMixedOffset = 1000;

template <class T>
struct Ladder {
  FockOperator<T> a, a_dag, b, b_dag;
};

/// a_i, a*_i, b_i = sqrt((N - Ncal)/N) a_i and b*_i = a*_i sqrt((N - Ncal)/N)
/// with N = N_cap. a*_i annihilates the top sector.
template <class T>
Ladder<T> build_ladder(std::shared_ptr<const FockSpace> space, int mode);

/// Number operator Ncal.
template <class T>
SparseOp<T> number_op(const FockSpace& space);
/// sqrt(N_cap - Ncal).
template <class T>
SparseOp<T> sqrt_cap_minus_number(const FockSpace& space);

/// Projector onto states whose total is in [lo, hi].
template <class T>
SparseOp<T> sector_projector(const FockSpace& space, int lo, int hi);

/// Dense complex copy for spectral work.
Eigen::MatrixXcd to_dense(const SparseOp<Complex>& op);
SparseOp<Complex> from_dense(const Eigen::MatrixXcd& m, double drop = 0.0);

/// dGamma(h) = sum_ij h_ij a*_i a_j on the whole space.
SparseOp<Complex> d_gamma(const std::shared_ptr<const FockSpace>& space, const Eigen::MatrixXcd& h);

/// (Ncal + 1)^power as a dense diagonal.
Eigen::VectorXd number_weight(const FockSpace& space, double power);

}  // namespace gpregime::fock
