#include "gpregime/fock_ops.hpp"

#include "gpregime/error.hpp"

namespace gpregime::fock {

template <class T>
Ladder<T> build_ladder(std::shared_ptr<const FockSpace> space, int mode) {
  require(mode >= 0 && mode < space->modes(), ErrorKind::InvalidParameter, "mode index out of range");
  const std::size_t n = space->dim();
  const long cap = space->n_cap();
  Ladder<T> out;
  SparseOp<T> a(n), ad(n), b(n), bd(n);
  for (std::size_t j = 0; j < n; ++j) {
    const Occupation& occ = space->state(j);
    const long tot = space->total(j);
    const long ni = occ[mode];
    if (ni > 0) {
      Occupation lower = occ;
      --lower[mode];
      const std::size_t i = *space->index(lower);
      a.add(i, j, Scalar<T>::sqrt_ratio(ni, 1));
      // sqrt((N - Ncal)/N) acts after a, on total - 1
      b.add(i, j, Scalar<T>::sqrt_ratio(ni * (cap - tot + 1), cap));
    }
    if (tot < cap) {
      Occupation upper = occ;
      ++upper[mode];
      const std::size_t i = *space->index(upper);
      ad.add(i, j, Scalar<T>::sqrt_ratio(ni + 1, 1));
      bd.add(i, j, Scalar<T>::sqrt_ratio((ni + 1) * (cap - tot), cap));
    }
  }
  out.a = {space, std::move(a), false, -1};
  out.a_dag = {space, std::move(ad), false, 1};
  out.b = {space, std::move(b), false, -1};
  out.b_dag = {space, std::move(bd), false, 1};
  return out;
}

template <class T>
SparseOp<T> number_op(const FockSpace& space) {
  SparseOp<T> out(space.dim());
  for (std::size_t i = 0; i < space.dim(); ++i) out.add(i, i, Scalar<T>::from_int(space.total(i)));
  return out;
}

template <class T>
SparseOp<T> sqrt_cap_minus_number(const FockSpace& space) {
  SparseOp<T> out(space.dim());
  for (std::size_t i = 0; i < space.dim(); ++i)
    out.add(i, i, Scalar<T>::sqrt_ratio(space.n_cap() - space.total(i), 1));
  return out;
}

template <class T>
SparseOp<T> sector_projector(const FockSpace& space, int lo, int hi) {
  SparseOp<T> out(space.dim());
  for (std::size_t i = 0; i < space.dim(); ++i)
    if (space.total(i) >= lo && space.total(i) <= hi) out.add(i, i, Scalar<T>::from_int(1));
  return out;
}

template Ladder<Complex> build_ladder(std::shared_ptr<const FockSpace>, int);
template Ladder<QSurd> build_ladder(std::shared_ptr<const FockSpace>, int);
template SparseOp<Complex> number_op(const FockSpace&);
template SparseOp<QSurd> number_op(const FockSpace&);
template SparseOp<Complex> sqrt_cap_minus_number(const FockSpace&);
template SparseOp<QSurd> sqrt_cap_minus_number(const FockSpace&);
template SparseOp<Complex> sector_projector(const FockSpace&, int, int);
template SparseOp<QSurd> sector_projector(const FockSpace&, int, int);

Eigen::MatrixXcd to_dense(const SparseOp<Complex>& op) {
  const auto n = static_cast<Eigen::Index>(op.dim());
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n, n);
  for (std::size_t i = 0; i < op.dim(); ++i)
    for (const auto& [j, v] : op.row(i)) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
  return m;
}

SparseOp<Complex> from_dense(const Eigen::MatrixXcd& m, double drop) {
  SparseOp<Complex> out(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      if (std::abs(m(i, j)) > drop) out.add(static_cast<std::size_t>(i), static_cast<std::size_t>(j), m(i, j));
  return out;
}

SparseOp<Complex> d_gamma(const std::shared_ptr<const FockSpace>& space, const Eigen::MatrixXcd& h) {
  const int M = space->modes();
  require(h.rows() == M && h.cols() == M, ErrorKind::InvalidCoefficients, "one-body matrix has wrong size");
  std::vector<Ladder<Complex>> lad;
  for (int i = 0; i < M; ++i) lad.push_back(build_ladder<Complex>(space, i));
  SparseOp<Complex> out(space->dim());
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < M; ++j)
      if (h(i, j) != Complex{}) out += h(i, j) * (lad[i].a_dag.matrix * lad[j].a.matrix);
  return out;
}

Eigen::VectorXd number_weight(const FockSpace& space, double power) {
  Eigen::VectorXd w(static_cast<Eigen::Index>(space.dim()));
  for (std::size_t i = 0; i < space.dim(); ++i)
    w[static_cast<Eigen::Index>(i)] = std::pow(space.total(i) + 1.0, power);
  return w;
}

}  // namespace gpregime::fock
