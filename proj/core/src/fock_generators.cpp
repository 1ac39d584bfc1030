#include "gpregime/fock_generators.hpp"

#include <cmath>

#include "gpregime/error.hpp"

namespace gpregime::fock {

namespace {

std::vector<Ladder<Complex>> ladders(const std::shared_ptr<const FockSpace>& space) {
  std::vector<Ladder<Complex>> out;
  for (int i = 0; i < space->modes(); ++i) out.push_back(build_ladder<Complex>(space, i));
  return out;
}

void check_square(const Eigen::MatrixXd& m, int modes, const char* what) {
  require(m.rows() == modes && m.cols() == modes, ErrorKind::InvalidCoefficients,
          std::string(what) + " must be M x M");
}

double lambda_max(const Eigen::MatrixXcd& m) {
  const Eigen::MatrixXcd h = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

// sum conj(f_i) b_i and sum g_i b*_i
Eigen::MatrixXcd b_of(const std::vector<Ladder<Complex>>& L, const Eigen::VectorXcd& f) {
  SparseOp<Complex> out(L.front().b.matrix.dim());
  for (std::size_t i = 0; i < L.size(); ++i) out += std::conj(f[static_cast<Eigen::Index>(i)]) * L[i].b.matrix;
  return to_dense(out);
}

Eigen::MatrixXcd b_star_of(const std::vector<Ladder<Complex>>& L, const Eigen::VectorXcd& g) {
  SparseOp<Complex> out(L.front().b.matrix.dim());
  for (std::size_t i = 0; i < L.size(); ++i) out += g[static_cast<Eigen::Index>(i)] * L[i].b_dag.matrix;
  return to_dense(out);
}

}  // namespace

SparseOp<Complex> build_B(const std::shared_ptr<const FockSpace>& space, const Eigen::MatrixXd& eta) {
  const int M = space->modes();
  check_square(eta, M, "eta");
  require((eta - eta.transpose()).cwiseAbs().maxCoeff() == 0.0, ErrorKind::InvalidCoefficients,
          "eta must be symmetric");
  const auto L = ladders(space);
  SparseOp<Complex> B(space->dim());
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < M; ++j) {
      if (eta(i, j) == 0.0) continue;
      const Complex c(0.5 * eta(i, j));
      B += c * (L[i].b_dag.matrix * L[j].b_dag.matrix);
      B -= c * (L[i].b.matrix * L[j].b.matrix);
    }
  return B;
}

SparseOp<Complex> build_A(const std::shared_ptr<const FockSpace>& space, const Eigen::MatrixXd& nu,
                          const Eigen::MatrixXd& g) {
  const int M = space->modes();
  check_square(nu, M, "nu");
  check_square(g, M, "g");
  const auto L = ladders(space);
  SparseOp<Complex> half(space->dim());
  for (int x = 0; x < M; ++x)
    for (int y = 0; y < M; ++y) {
      if (nu(x, y) == 0.0) continue;
      for (int z = 0; z < M; ++z) {
        const double c = nu(x, y) * g(x, z);
        if (c == 0.0) continue;
        half += Complex(c) * (L[x].b_dag.matrix * L[y].a_dag.matrix * L[z].a.matrix);
      }
    }
  SparseOp<Complex> A = half - half.adjoint();
  return Complex(1.0 / std::sqrt(static_cast<double>(space->n_cap()))) * A;
}

Exponential exp_generator(const SparseOp<Complex>& X, double t) {
  Exponential e;
  e.U = numerics::expm(Eigen::MatrixXcd(t * to_dense(X)), &e.info);
  const auto n = e.U.rows();
  e.unitarity_defect = (e.U.adjoint() * e.U - Eigen::MatrixXcd::Identity(n, n)).cwiseAbs().maxCoeff();
  if (!std::isfinite(e.unitarity_defect))
    fail(ErrorKind::SolverFailure, "matrix exponential did not converge", e.unitarity_defect);
  return e;
}

double growth_ratio(const FockSpace& space, const Eigen::MatrixXcd& U, int n) {
  const Eigen::VectorXd w = number_weight(space, n);
  const Eigen::VectorXd s = number_weight(space, -0.5 * n);
  const Eigen::MatrixXcd inner = U.adjoint() * w.cast<Complex>().asDiagonal() * U;
  return lambda_max(s.cast<Complex>().asDiagonal() * inner * s.cast<Complex>().asDiagonal());
}

double GrowthTable::sup(int power) const {
  double m = 0.0;
  for (const auto& e : entries)
    if (e.power == power) m = std::max(m, e.ratio);
  return m;
}

double GrowthTable::sup(int power, int n_cap) const {
  double m = 0.0;
  for (const auto& e : entries)
    if (e.power == power && e.n_cap == n_cap) m = std::max(m, e.ratio);
  return m;
}

GrowthTable B_growth(int modes, const std::vector<int>& n_caps, const Eigen::MatrixXd& eta_hat,
                     const std::vector<double>& norms, const std::vector<int>& powers) {
  GrowthTable t;
  for (int nc : n_caps) {
    auto space = std::make_shared<const FockSpace>(modes, nc);
    const auto B = build_B(space, eta_hat);
    for (double s : norms) {
      const auto e = exp_generator(B, s);
      for (int p : powers) t.entries.push_back({nc, p, s, s == 0.0 ? 1.0 : growth_ratio(*space, e.U, p)});
    }
  }
  return t;
}

GrowthTable A_growth(int modes, const std::vector<int>& n_caps, const Eigen::MatrixXd& nu,
                     const Eigen::MatrixXd& g, const std::vector<double>& ts, const std::vector<int>& powers) {
  GrowthTable t;
  for (int nc : n_caps) {
    auto space = std::make_shared<const FockSpace>(modes, nc);
    const auto A = build_A(space, nu, g);
    for (double s : ts) {
      const auto e = exp_generator(A, s);
      for (int p : powers) t.entries.push_back({nc, p, s, s == 0.0 ? 1.0 : growth_ratio(*space, e.U, p)});
    }
  }
  return t;
}

bool monotone_in_scale(const GrowthTable& t, double slack) {
  for (const auto& a : t.entries)
    for (const auto& b : t.entries) {
      if (a.n_cap != b.n_cap || a.power != b.power) continue;
      // compare along the same sign of the scale only
      if (a.scale * b.scale < 0.0) continue;
      if (std::abs(a.scale) < std::abs(b.scale) && a.ratio > b.ratio * (1.0 + slack)) return false;
    }
  return true;
}

DEtaReport compute_d_eta(const std::shared_ptr<const FockSpace>& space, const Eigen::MatrixXd& eta,
                         const Eigen::VectorXcd& f, int n) {
  const int M = space->modes();
  require(f.size() == M, ErrorKind::InvalidCoefficients, "f must have M entries");
  const auto L = ladders(space);
  const auto e = exp_generator(build_B(space, eta));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(eta);
  const Eigen::VectorXd lam = es.eigenvalues();
  const Eigen::MatrixXd Q = es.eigenvectors();
  const Eigen::MatrixXd ch = Q * lam.array().cosh().matrix().asDiagonal() * Q.transpose();
  const Eigen::MatrixXd sh = Q * lam.array().sinh().matrix().asDiagonal() * Q.transpose();

  DEtaReport r;
  r.n_cap = space->n_cap();
  const Eigen::MatrixXcd bf = b_of(L, f);
  const Eigen::VectorXcd cf = ch.cast<Complex>() * f;
  const Eigen::VectorXcd sf = sh.cast<Complex>() * f.conjugate();
  r.d = e.U.adjoint() * bf * e.U - b_of(L, cf) - b_star_of(L, sf);
  r.max_abs = r.d.cwiseAbs().maxCoeff();

  const Eigen::VectorXd left = number_weight(*space, 0.5 * n);
  const Eigen::VectorXd right = number_weight(*space, -0.5 * (n + 3));
  const Eigen::MatrixXcd D = left.cast<Complex>().asDiagonal() * r.d;
  const Eigen::MatrixXcd K = right.cast<Complex>().asDiagonal() * (D.adjoint() * D) * right.cast<Complex>().asDiagonal();
  r.ratio = std::sqrt(std::max(0.0, lambda_max(K))) / f.norm();
  return r;
}

BchCheck bch_second_order(const std::shared_ptr<const FockSpace>& space, const Eigen::MatrixXd& eta,
                          const Eigen::VectorXcd& f, double s) {
  const auto L = ladders(space);
  auto defect = [&](double scale) {
    const Eigen::MatrixXd e = scale * eta;
    const Eigen::MatrixXcd d = compute_d_eta(space, e, f).d;
    const Eigen::MatrixXcd X = b_of(L, f);
    const Eigen::MatrixXcd B = to_dense(build_B(space, e));
    const Eigen::MatrixXcd c1 = X * B - B * X;
    const Eigen::MatrixXcd c2 = c1 * B - B * c1;
    const Eigen::VectorXcd f2 = 0.5 * (e * e).cast<Complex>() * f;
    const Eigen::VectorXcd f1 = e.cast<Complex>() * f.conjugate();
    const Eigen::MatrixXcd bch = c1 + 0.5 * c2 - b_of(L, f2) - b_star_of(L, f1);
    return (d - bch).norm();
  };
  BchCheck c;
  c.defect_s = defect(s);
  c.defect_half = defect(0.5 * s);
  c.ratio = c.defect_half > 0.0 ? c.defect_s / c.defect_half : 0.0;
  return c;
}

double spectrum_shift(const SparseOp<Complex>& H, const Eigen::MatrixXcd& U) {
  const Eigen::MatrixXcd h = to_dense(H);
  const Eigen::MatrixXcd c = U.adjoint() * h * U;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> e1(0.5 * (h + h.adjoint()), Eigen::EigenvaluesOnly);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> e2(0.5 * (c + c.adjoint()), Eigen::EigenvaluesOnly);
  return (e1.eigenvalues() - e2.eigenvalues()).cwiseAbs().maxCoeff();
}

}  // namespace gpregime::fock
