#include "gpregime/fock_identities.hpp"

#include <random>

#include "gpregime/error.hpp"

namespace gpregime::fock {

namespace {

template <class T>
void push(IdentitySuite& s, const std::string& name, const SparseOp<T>& diff) {
  s.checks.push_back({name, diff.max_abs(), diff.exactly_zero()});
}

template <class T>
std::vector<Ladder<T>> ladders(const std::shared_ptr<const FockSpace>& space) {
  std::vector<Ladder<T>> out;
  for (int i = 0; i < space->modes(); ++i) out.push_back(build_ladder<T>(space, i));
  return out;
}

std::shared_ptr<const FockSpace> make_space(int modes, int n_cap, NumericMode mode) {
  auto space = std::make_shared<const FockSpace>(modes, n_cap);
  if (mode == NumericMode::Exact)
    require(space->dim() <= kExactMaxDimension, ErrorKind::ResourceLimit,
            "exact mode is limited to dimension " + std::to_string(kExactMaxDimension) + ", got " +
                std::to_string(space->dim()));
  return space;
}

template <class T>
IdentitySuite ccr_impl(int modes, int n_cap, NumericMode mode) {
  const auto space = make_space(modes, n_cap, mode);
  IdentitySuite s{modes, n_cap, space->dim(), mode, {}};
  const auto L = ladders<T>(space);
  const auto below = sector_projector<T>(*space, 0, n_cap - 1);
  const auto id = SparseOp<T>::identity(space->dim());
  for (int i = 0; i < modes; ++i)
    for (int j = 0; j < modes; ++j) {
      const std::string tag = "(" + std::to_string(i) + "," + std::to_string(j) + ")";
      auto c = commutator(L[i].a.matrix, L[j].a_dag.matrix);
      if (i == j) c -= id;
      push(s, "[a_i,a*_j]-delta_ij below top " + tag, c * below);
      push(s, "[a_i,a_j] " + tag, commutator(L[i].a.matrix, L[j].a.matrix));
    }
  // vacuum is index 0
  for (int i = 0; i < modes; ++i) {
    const auto aa = L[i].a.matrix * L[i].a_dag.matrix;
    SparseOp<T> d(1);
    d.add(0, 0, aa.at(0, 0) - Scalar<T>::from_int(1));
    push(s, "<vac|a_i a*_i|vac>-1 (" + std::to_string(i) + ")", d);
  }
  return s;
}

template <class T>
IdentitySuite b_impl(int modes, int n_cap, NumericMode mode) {
  const auto space = make_space(modes, n_cap, mode);
  IdentitySuite s{modes, n_cap, space->dim(), mode, {}};
  const auto L = ladders<T>(space);
  const auto num = number_op<T>(*space);
  const auto id = SparseOp<T>::identity(space->dim());
  const auto top = sector_projector<T>(*space, n_cap, n_cap);
  const T inv_n = Scalar<T>::sqrt_ratio(1, static_cast<long>(n_cap) * n_cap);
  for (int i = 0; i < modes; ++i) {
    for (int j = 0; j < modes; ++j) {
      const std::string tag = "(" + std::to_string(i) + "," + std::to_string(j) + ")";
      // [b_i, b*_j] - (1 - N/N_cap) delta_ij + a*_j a_i / N_cap
      auto c = commutator(L[i].b.matrix, L[j].b_dag.matrix);
      if (i == j) c -= id - inv_n * num;
      c += inv_n * (L[j].a_dag.matrix * L[i].a.matrix);
      push(s, "[b_i,b*_j] " + tag, c);
      push(s, "[b_i,b_j] " + tag, commutator(L[i].b.matrix, L[j].b.matrix));
      for (int k = 0; k < modes; ++k) {
        const std::string tag3 =
            "(" + std::to_string(i) + "," + std::to_string(j) + "," + std::to_string(k) + ")";
        const auto ajak = L[j].a_dag.matrix * L[k].a.matrix;
        auto c2 = commutator(L[i].b.matrix, ajak);
        if (i == j) c2 -= L[k].b.matrix;
        push(s, "[b_i,a*_j a_k] " + tag3, c2);
        auto c3 = commutator(L[i].b_dag.matrix, ajak);
        if (i == k) c3 += L[j].b_dag.matrix;
        push(s, "[b*_i,a*_j a_k] " + tag3, c3);
      }
    }
    push(s, "[b_i,N]-b_i (" + std::to_string(i) + ")", commutator(L[i].b.matrix, num) - L[i].b.matrix);
    push(s, "b*_i on top sector (" + std::to_string(i) + ")", L[i].b_dag.matrix * top);
  }
  return s;
}

template <class T>
IdentitySuite un_impl(int modes, int n_cap, NumericMode mode) {
  require(modes >= 2, ErrorKind::InvalidParameter, "U_N needs at least two modes");
  const auto space = make_space(modes, n_cap, mode);
  IdentitySuite s{modes, n_cap, space->dim(), mode, {}};
  const int m0 = 0;
  const auto L = ladders<T>(space);
  const auto U = build_UN<T>(*space, m0);
  const auto Ud = U.adjoint();
  const auto sector = sector_projector<T>(*space, n_cap, n_cap);
  const auto G = gamma_q<T>(*space, m0);
  const auto num = number_op<T>(*space);
  const T N = Scalar<T>::from_int(n_cap);
  const T sqrtN = Scalar<T>::sqrt_ratio(n_cap, 1);
  const auto root = sqrt_cap_minus_number<T>(*space);

  push(s, "U*U - 1 on the sector", Ud * U - sector);
  push(s, "U U* - Gamma(q)", U * Ud - G);
  // U a*(phi) a(phi) U* = N - Ncal on the orthogonal complement
  push(s, "U a*0 a0 U* - (N - Ncal)",
       U * (L[m0].a_dag.matrix * L[m0].a.matrix) * Ud - G * (N * SparseOp<T>::identity(space->dim()) - num) * G);
  for (int f = 1; f < modes; ++f) {
    const std::string tf = "(" + std::to_string(f) + ")";
    const auto lhs2 = U * (L[f].a_dag.matrix * L[m0].a.matrix) * Ud;
    push(s, "U a*f a0 U* - a*f sqrt(N-Ncal) " + tf, lhs2 - G * (L[f].a_dag.matrix * root) * G);
    push(s, "a*f sqrt(N-Ncal) - sqrt(N) b*f " + tf,
         G * (L[f].a_dag.matrix * root - sqrtN * L[f].b_dag.matrix) * G);
    const auto lhs3 = U * (L[m0].a_dag.matrix * L[f].a.matrix) * Ud;
    push(s, "U a*0 ag U* - sqrt(N-Ncal) ag " + tf, lhs3 - G * (root * L[f].a.matrix) * G);
    push(s, "sqrt(N-Ncal) ag - sqrt(N) bg " + tf, G * (root * L[f].a.matrix - sqrtN * L[f].b.matrix) * G);
    for (int g = 1; g < modes; ++g) {
      const auto fg = L[f].a_dag.matrix * L[g].a.matrix;
      push(s, "U a*f ag U* - a*f ag (" + std::to_string(f) + "," + std::to_string(g) + ")",
           U * fg * Ud - G * fg * G);
    }
  }
  // pure condensate maps to the vacuum
  Occupation cond(modes, 0);
  cond[m0] = n_cap;
  const std::size_t ic = *space->index(cond);
  SparseOp<T> d(space->dim());
  for (std::size_t i = 0; i < space->dim(); ++i) {
    const T expected = i == 0 ? Scalar<T>::from_int(1) : T{};
    d.add(i, 0, U.at(i, ic) - expected);
  }
  push(s, "U phi^N - vacuum", d);
  push(s, "Gamma(q)^2 - Gamma(q)", G * G - G);
  push(s, "[Gamma(q), N]", commutator(G, num));
  return s;
}

std::mt19937 rng_for(unsigned seed) { return std::mt19937(seed); }

Complex random_complex(std::mt19937& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  const double re = n(rng);
  const double im = n(rng);
  return {re, im};
}

std::size_t vidx(int M, int i, int j, int k, int l) {
  return static_cast<std::size_t>(((i * M + j) * M + k) * M + l);
}

Eigen::VectorXcd random_state(std::mt19937& rng, const FockSpace& space, int total) {
  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(space.dim()));
  for (std::size_t i = 0; i < space.dim(); ++i)
    if (space.total(i) == total) psi[static_cast<Eigen::Index>(i)] = random_complex(rng);
  return psi / psi.norm();
}

Complex expect(const SparseOp<Complex>& op, const Eigen::VectorXcd& psi) {
  Complex s{};
  for (std::size_t i = 0; i < op.dim(); ++i)
    for (const auto& [j, v] : op.row(i))
      s += std::conj(psi[static_cast<Eigen::Index>(i)]) * v * psi[static_cast<Eigen::Index>(j)];
  return s;
}

Eigen::VectorXcd apply(const SparseOp<Complex>& op, const Eigen::VectorXcd& psi) {
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(psi.size());
  for (std::size_t i = 0; i < op.dim(); ++i)
    for (const auto& [j, v] : op.row(i)) out[static_cast<Eigen::Index>(i)] += v * psi[static_cast<Eigen::Index>(j)];
  return out;
}

}  // namespace

double IdentitySuite::worst() const {
  double w = 0.0;
  for (const auto& c : checks) w = std::max(w, c.max_deviation);
  return w;
}

bool IdentitySuite::pass(double tol) const {
  if (mode == NumericMode::Exact) {
    for (const auto& c : checks)
      if (!c.exact_zero) return false;
    return true;
  }
  return worst() <= tol;
}

IdentitySuite verify_ccr(int modes, int n_cap, NumericMode mode) {
  return mode == NumericMode::Exact ? ccr_impl<QSurd>(modes, n_cap, mode)
                                    : ccr_impl<Complex>(modes, n_cap, mode);
}

IdentitySuite verify_b_commutators(int modes, int n_cap, NumericMode mode, unsigned seed) {
  if (mode == NumericMode::Exact) return b_impl<QSurd>(modes, n_cap, mode);
  auto s = b_impl<Complex>(modes, n_cap, mode);
  // [b(f), a*(g) a(h)] = <f, g> b(h), with b(f) = sum conj(f_i) b_i
  const auto space = make_space(modes, n_cap, mode);
  const auto L = ladders<Complex>(space);
  auto rng = rng_for(seed);
  std::vector<Complex> f(modes), g(modes), h(modes);
  for (int i = 0; i < modes; ++i) {
    f[i] = random_complex(rng);
    g[i] = random_complex(rng);
    h[i] = random_complex(rng);
  }
  SparseOp<Complex> bf(space->dim()), ag(space->dim()), ah(space->dim()), bh(space->dim());
  Complex fg{};
  for (int i = 0; i < modes; ++i) {
    bf += std::conj(f[i]) * L[i].b.matrix;
    ag += g[i] * L[i].a_dag.matrix;
    ah += std::conj(h[i]) * L[i].a.matrix;
    bh += std::conj(h[i]) * L[i].b.matrix;
    fg += std::conj(f[i]) * g[i];
  }
  push(s, "[b(f), a*(g) a(h)] - <f,g> b(h)", commutator(bf, ag * ah) - fg * bh);
  return s;
}

template <class T>
SparseOp<T> build_UN(const FockSpace& space, int mode0) {
  require(mode0 >= 0 && mode0 < space.modes(), ErrorKind::InvalidParameter, "mode0 out of range");
  SparseOp<T> U(space.dim());
  for (std::size_t j = 0; j < space.dim(); ++j) {
    if (space.total(j) != space.n_cap()) continue;
    Occupation occ = space.state(j);
    occ[mode0] = 0;
    U.add(*space.index(occ), j, Scalar<T>::from_int(1));
  }
  return U;
}

template <class T>
SparseOp<T> gamma_q(const FockSpace& space, int mode0) {
  SparseOp<T> G(space.dim());
  for (std::size_t i = 0; i < space.dim(); ++i)
    if (space.state(i)[mode0] == 0) G.add(i, i, Scalar<T>::from_int(1));
  return G;
}

template SparseOp<Complex> build_UN(const FockSpace&, int);
template SparseOp<QSurd> build_UN(const FockSpace&, int);
template SparseOp<Complex> gamma_q(const FockSpace&, int);
template SparseOp<QSurd> gamma_q(const FockSpace&, int);

IdentitySuite verify_un(int modes, int n_cap, NumericMode mode) {
  return mode == NumericMode::Exact ? un_impl<QSurd>(modes, n_cap, mode)
                                    : un_impl<Complex>(modes, n_cap, mode);
}

Complex CoefficientSet::V(int i, int j, int k, int l) const { return v[vidx(modes(), i, j, k, l)]; }

void validate(const CoefficientSet& c) {
  const int M = c.modes();
  require(M >= 1 && c.h.cols() == M, ErrorKind::InvalidCoefficients, "h must be square");
  require(c.v.size() == static_cast<std::size_t>(M) * M * M * M, ErrorKind::InvalidCoefficients,
          "v must have M^4 entries");
  require(c.mode0 >= 0 && c.mode0 < M, ErrorKind::InvalidCoefficients, "mode0 out of range");
  require((c.h - c.h.adjoint()).cwiseAbs().maxCoeff() <= 1e-14 * (1.0 + c.h.cwiseAbs().maxCoeff()),
          ErrorKind::InvalidCoefficients, "h is not Hermitian");
  double scale = 1.0;
  for (const auto& x : c.v) scale = std::max(scale, std::abs(x));
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < M; ++j)
      for (int k = 0; k < M; ++k)
        for (int l = 0; l < M; ++l) {
          const Complex x = c.V(i, j, k, l);
          const double dev = std::max({std::abs(x - c.V(j, i, k, l)), std::abs(x - c.V(i, j, l, k)),
                                       std::abs(x - std::conj(c.V(k, l, i, j)))});
          require(dev <= 1e-14 * scale, ErrorKind::InvalidCoefficients,
                  "v violates the bosonic symmetries at (" + std::to_string(i) + "," + std::to_string(j) +
                      "," + std::to_string(k) + "," + std::to_string(l) + ")");
        }
  if (c.eta.size() > 0)
    require(c.eta.rows() == c.eta.cols() && (c.eta - c.eta.transpose()).cwiseAbs().maxCoeff() == 0.0,
            ErrorKind::InvalidCoefficients, "eta must be real symmetric");
}

CoefficientSet random_coefficients(int modes, unsigned seed, double v_scale, double eta_norm) {
  require(modes >= 1, ErrorKind::InvalidParameter, "need at least one mode");
  auto rng = rng_for(seed);
  const int M = modes;
  CoefficientSet c;
  Eigen::MatrixXcd x(M, M);
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < M; ++j) x(i, j) = random_complex(rng);
  c.h = 0.5 * (x + x.adjoint());
  std::vector<Complex> raw(static_cast<std::size_t>(M) * M * M * M);
  for (auto& r : raw) r = random_complex(rng);
  c.v.assign(raw.size(), Complex{});
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < M; ++j)
      for (int k = 0; k < M; ++k)
        for (int l = 0; l < M; ++l) {
          // average over the group generated by the three symmetries
          const Complex s = raw[vidx(M, i, j, k, l)] + raw[vidx(M, j, i, k, l)] + raw[vidx(M, i, j, l, k)] +
                            raw[vidx(M, j, i, l, k)] + std::conj(raw[vidx(M, k, l, i, j)]) +
                            std::conj(raw[vidx(M, l, k, i, j)]) + std::conj(raw[vidx(M, k, l, j, i)]) +
                            std::conj(raw[vidx(M, l, k, j, i)]);
          c.v[vidx(M, i, j, k, l)] = v_scale * s / 8.0;
        }
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::MatrixXd e(M, M);
  for (int i = 0; i < M; ++i)
    for (int j = 0; j <= i; ++j) e(i, j) = e(j, i) = n(rng);
  c.eta = e.norm() > 0 ? Eigen::MatrixXd(eta_norm * e / e.norm()) : e;
  c.nu = Eigen::MatrixXd(M, M);
  c.g = Eigen::MatrixXd(M, M);
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < M; ++j) {
      c.nu(i, j) = n(rng);
      c.g(i, j) = n(rng);
    }
  c.nu *= 0.1 / c.nu.norm();
  c.g *= 1.0 / c.g.norm();
  return c;
}

SparseOp<Complex> build_HN(const CoefficientSet& c, const std::shared_ptr<const FockSpace>& space) {
  validate(c);
  const int M = c.modes();
  require(space->modes() == M, ErrorKind::InvalidCoefficients, "coefficients and space disagree on M");
  const auto L = ladders<Complex>(space);
  SparseOp<Complex> H = d_gamma(space, c.h);
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < M; ++j)
      for (int k = 0; k < M; ++k)
        for (int l = 0; l < M; ++l) {
          const Complex x = c.V(i, j, k, l);
          if (x == Complex{}) continue;
          H += (0.5 * x) * (L[i].a_dag.matrix * L[j].a_dag.matrix * L[l].a.matrix * L[k].a.matrix);
        }
  return H;
}

std::array<SparseOp<Complex>, 5> build_LN(const CoefficientSet& c,
                                          const std::shared_ptr<const FockSpace>& space) {
  validate(c);
  const int M = c.modes();
  const int m0 = c.mode0;
  const std::size_t dim = space->dim();
  const auto L = ladders<Complex>(space);
  const double N = space->n_cap();
  const double sN = std::sqrt(N);
  const auto id = SparseOp<Complex>::identity(dim);
  const auto n_minus = Complex(N) * id - number_op<Complex>(*space);
  // image of a*_i a_j under conjugation with U_N
  auto T = [&](int i, int j) -> SparseOp<Complex> {
    if (i == m0 && j == m0) return n_minus;
    if (j == m0) return Complex(sN) * L[i].b_dag.matrix;
    if (i == m0) return Complex(sN) * L[j].b.matrix;
    return L[i].a_dag.matrix * L[j].a.matrix;
  };
  auto outside = [&](std::initializer_list<int> idx) {
    int n = 0;
    for (int x : idx) n += x != m0;
    return n;
  };
  std::array<SparseOp<Complex>, 5> out;
  for (auto& o : out) o = SparseOp<Complex>(dim);
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < M; ++j)
      if (c.h(i, j) != Complex{}) out[outside({i, j})] += c.h(i, j) * T(i, j);
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < M; ++j)
      for (int k = 0; k < M; ++k)
        for (int l = 0; l < M; ++l) {
          const Complex x = c.V(i, j, k, l);
          if (x == Complex{}) continue;
          // a*_i a*_j a_l a_k = (a*_i a_l)(a*_j a_k) - delta_jl a*_i a_k
          SparseOp<Complex> term = T(i, l) * T(j, k);
          if (j == l) term -= T(i, k);
          out[outside({i, j, k, l})] += (0.5 * x) * term;
        }
  return out;
}

EnergyIdentity energy_identity(const CoefficientSet& c, int n_cap, std::size_t samples, unsigned seed) {
  auto space = std::make_shared<const FockSpace>(c.modes(), n_cap);
  const auto H = build_HN(c, space);
  const auto parts = build_LN(c, space);
  SparseOp<Complex> Lt(space->dim());
  for (const auto& p : parts) Lt += p;
  const auto G = gamma_q<Complex>(*space, c.mode0);
  const auto LN = G * Lt * G;
  const auto U = build_UN<Complex>(*space, c.mode0);
  auto rng = rng_for(seed);
  EnergyIdentity out;
  out.samples = samples;
  for (std::size_t s = 0; s < samples; ++s) {
    const auto psi = random_state(rng, *space, n_cap);
    const Complex e1 = expect(H, psi);
    const Complex e2 = expect(LN, apply(U, psi));
    out.max_deviation = std::max(out.max_deviation, std::abs(e1 - e2));
  }
  Occupation cond(c.modes(), 0);
  cond[c.mode0] = n_cap;
  Eigen::VectorXcd phiN = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(space->dim()));
  phiN[static_cast<Eigen::Index>(*space->index(cond))] = 1.0;
  // <vac, L vac> only sees the constant piece
  const Complex vac = parts[0].at(0, 0);
  out.vacuum_deviation = std::abs(expect(H, phiN) - vac);
  return out;
}

GpAdapted gp_adapt(const CoefficientSet& c, int n_cap) {
  validate(c);
  const int M = c.modes();
  const double N = n_cap;
  auto fock = [&](const Eigen::VectorXcd& x) {
    Eigen::MatrixXcd F = c.h;
    for (int i = 0; i < M; ++i)
      for (int k = 0; k < M; ++k) {
        Complex s{};
        for (int j = 0; j < M; ++j)
          for (int l = 0; l < M; ++l) s += c.V(i, j, k, l) * std::conj(x[j]) * x[l];
        F(i, k) += N * s;
      }
    return F;
  };
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es0(c.h);
  Eigen::VectorXcd x = es0.eigenvectors().col(0);
  GpAdapted out;
  double res = 1.0;
  for (int it = 0; it < 2000 && res > 1e-14; ++it) {
    const Eigen::MatrixXcd F = fock(x);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(F);
    Eigen::VectorXcd y = es.eigenvectors().col(0);
    y *= std::polar(1.0, -std::arg(x.dot(y) == Complex{} ? Complex(1.0) : x.dot(y)));
    // x.dot(y) = x^* y; align phase with the previous iterate
    x = (0.5 * x + 0.5 * y).normalized();
    const Eigen::VectorXcd Fx = fock(x) * x;
    const Complex mu = x.dot(Fx);
    res = (Fx - mu * x).norm();
    out.iterations = it + 1;
  }
  if (res > 1e-10) fail(ErrorKind::SolverFailure, "discrete GP iteration did not converge", res);
  // unitary Q with first column x
  Eigen::MatrixXcd A = Eigen::MatrixXcd::Identity(M, M);
  A.col(0) = x;
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(A);
  Eigen::MatrixXcd Q = qr.householderQ();
  Q.col(0) *= x.dot(Q.col(0)) == Complex{} ? Complex(1.0) : std::conj(x.dot(Q.col(0))) / std::abs(x.dot(Q.col(0)));
  // permute so x sits at mode0
  if (c.mode0 != 0) Q.col(0).swap(Q.col(c.mode0));
  CoefficientSet r = c;
  r.h = Q.adjoint() * c.h * Q;
  r.h = 0.5 * (r.h + r.h.adjoint());
  r.v.assign(c.v.size(), Complex{});
  // v'_ijkl = sum conj(Q_ai) conj(Q_bj) Q_ck Q_dl v_abcd, one index at a time
  std::vector<Complex> t1(c.v.size()), t2(c.v.size()), t3(c.v.size());
  auto at = [M](std::vector<Complex>& w, int a, int b, int cc, int d) -> Complex& { return w[vidx(M, a, b, cc, d)]; };
  std::vector<Complex> v0 = c.v;
  for (int i = 0; i < M; ++i)
    for (int b = 0; b < M; ++b)
      for (int cc = 0; cc < M; ++cc)
        for (int d = 0; d < M; ++d) {
          Complex s{};
          for (int a = 0; a < M; ++a) s += std::conj(Q(a, i)) * at(v0, a, b, cc, d);
          at(t1, i, b, cc, d) = s;
        }
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < M; ++j)
      for (int cc = 0; cc < M; ++cc)
        for (int d = 0; d < M; ++d) {
          Complex s{};
          for (int b = 0; b < M; ++b) s += std::conj(Q(b, j)) * at(t1, i, b, cc, d);
          at(t2, i, j, cc, d) = s;
        }
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < M; ++j)
      for (int k = 0; k < M; ++k)
        for (int d = 0; d < M; ++d) {
          Complex s{};
          for (int cc = 0; cc < M; ++cc) s += Q(cc, k) * at(t2, i, j, cc, d);
          at(t3, i, j, k, d) = s;
        }
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < M; ++j)
      for (int k = 0; k < M; ++k)
        for (int l = 0; l < M; ++l) {
          Complex s{};
          for (int d = 0; d < M; ++d) s += Q(d, l) * at(t3, i, j, k, d);
          at(r.v, i, j, k, l) = s;
        }
  // restore exact symmetries lost to rounding
  std::vector<Complex> sym(r.v.size());
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < M; ++j)
      for (int k = 0; k < M; ++k)
        for (int l = 0; l < M; ++l)
          sym[vidx(M, i, j, k, l)] =
              (r.V(i, j, k, l) + r.V(j, i, k, l) + r.V(i, j, l, k) + r.V(j, i, l, k) + std::conj(r.V(k, l, i, j)) +
               std::conj(r.V(l, k, i, j)) + std::conj(r.V(k, l, j, i)) + std::conj(r.V(l, k, j, i))) /
              8.0;
  r.v = std::move(sym);
  out.coeff = std::move(r);
  const int m0 = out.coeff.mode0;
  for (int p = 0; p < M; ++p) {
    if (p == m0) continue;
    out.residual = std::max(out.residual, std::abs(out.coeff.h(p, m0) + N * out.coeff.V(p, m0, m0, m0)));
  }
  return out;
}

double linear_term_reduction(const CoefficientSet& adapted, int n_cap) {
  auto space = std::make_shared<const FockSpace>(adapted.modes(), n_cap);
  const auto parts = build_LN(adapted, space);
  const auto L = ladders<Complex>(space);
  const double N = n_cap;
  const int m0 = adapted.mode0;
  const auto np1 = number_op<Complex>(*space) + SparseOp<Complex>::identity(space->dim());
  SparseOp<Complex> reduced(space->dim());
  for (int p = 0; p < adapted.modes(); ++p) {
    if (p == m0) continue;
    const Complex f = N * adapted.V(p, m0, m0, m0);
    reduced -= Complex(1.0 / std::sqrt(N)) * f * (L[p].b_dag.matrix * np1);
  }
  reduced += reduced.adjoint();
  return (parts[1] - reduced).max_abs();
}

LemmaReport to_report(const IdentitySuite& suite, const std::string& id, double tol) {
  LemmaReport r;
  r.id = id;
  r.add("modes", suite.modes);
  r.add("n_cap", suite.n_cap);
  r.add("dim", static_cast<double>(suite.dim));
  r.add("max_deviation", suite.worst());
  r.add("identities", static_cast<double>(suite.checks.size()));
  r.check(suite.mode == NumericMode::Exact ? "all_identities_exactly_zero" : "max_deviation_within_tol",
          suite.pass(tol));
  return r;
}

}  // namespace gpregime::fock
