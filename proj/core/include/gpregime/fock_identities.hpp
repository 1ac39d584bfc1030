#pragma once

#include <array>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gpregime/fock_ops.hpp"
#include "gpregime/report.hpp"

namespace gpregime::fock {

enum class NumericMode { Float, Exact };

/// Exact mode is limited to spaces of this dimension.
inline constexpr std::size_t kExactMaxDimension = 200;

struct IdentityCheck {
  std::string name;
  double max_deviation = 0.0;
  bool exact_zero = false;  ///< exact mode: the difference is identically 0
};

struct IdentitySuite {
  int modes = 0;
  int n_cap = 0;
  std::size_t dim = 0;
  NumericMode mode = NumericMode::Float;
  std::vector<IdentityCheck> checks;

  double worst() const;
  /// Float: worst <= tol. Exact: every check is identically zero.
  bool pass(double tol) const;
};

/// [a_i, a*_j] = delta_ij below the top sector, [a_i, a_j] = 0, and
/// <vac| a_i a*_i |vac> = 1.
IdentitySuite verify_ccr(int modes, int n_cap, NumericMode mode);

/// [b_i, b*_j] = (1 - N/N_cap) delta_ij - a*_j a_i / N_cap, [b_i, b_j] = 0,
/// [b_i, a*_j a_k] = delta_ij b_k, [b*_i, a*_j a_k] = -delta_ik b*_j,
/// [b_i, N] = b_i, and b*_i = 0 on the top sector. In float mode a contracted
/// check with random vectors is added.
IdentitySuite verify_b_commutators(int modes, int n_cap, NumericMode mode, unsigned seed = 7);

/// U_N from the N_cap-particle sector onto the states with no particle in
/// mode0, as a partial isometry on the whole space.
template <class T>
SparseOp<T> build_UN(const FockSpace& space, int mode0);

/// Gamma(q): projector onto states with no particle in mode0.
template <class T>
SparseOp<T> gamma_q(const FockSpace& space, int mode0);

/// Unitarity of U_N, the four conjugation relations for every pair of modes
/// orthogonal to mode0, U_N of the pure condensate, and Gamma(q)
/// idempotence and commutation with the number operator.
IdentitySuite verify_un(int modes, int n_cap, NumericMode mode);

/// Coefficients of a discrete M-mode Hamiltonian
///   H = sum h_ij a*_i a_j + 1/2 sum v_ijkl a*_i a*_j a_l a_k
/// with mode0 playing the condensate.
struct CoefficientSet {
  int mode0 = 0;
  Eigen::MatrixXcd h;
  std::vector<Complex> v;  ///< M^4, index ((i M + j) M + k) M + l
  Eigen::MatrixXd eta;     ///< real symmetric
  Eigen::MatrixXd nu;
  Eigen::MatrixXd g;

  int modes() const { return static_cast<int>(h.rows()); }
  Complex V(int i, int j, int k, int l) const;
};

/// Throws InvalidCoefficients unless h is Hermitian, v has the symmetries
/// v_ijkl = v_jikl = v_ijlk = conj(v_klij), and eta is real symmetric.
void validate(const CoefficientSet& c);

/// Random Hermitian h, symmetrised random v scaled by `v_scale`, random
/// symmetric eta of Frobenius norm `eta_norm`, random nu and g.
CoefficientSet random_coefficients(int modes, unsigned seed, double v_scale = 0.1,
                                   double eta_norm = 0.3);

SparseOp<Complex> build_HN(const CoefficientSet& c, const std::shared_ptr<const FockSpace>& space);

/// The five pieces of the excitation Hamiltonian acting on the whole space,
/// from the conjugation rules applied to each term of H: index patterns with
/// j entries outside mode0 go to piece j.
std::array<SparseOp<Complex>, 5> build_LN(const CoefficientSet& c,
                                          const std::shared_ptr<const FockSpace>& space);

struct EnergyIdentity {
  double max_deviation = 0.0;
  std::size_t samples = 0;
  double vacuum_deviation = 0.0;  ///< condensate energy against <vac, L vac>
};

/// <psi, H psi> against <U psi, Gamma(q) L Gamma(q) U psi> for random sector
/// states psi.
EnergyIdentity energy_identity(const CoefficientSet& c, int n_cap, std::size_t samples,
                               unsigned seed);

/// Rotates the mode basis so that mode0 solves the discrete GP equation
/// (h + N F[c]) c = mu c, F[c]_ik = sum_jl v_ijkl conj(c_j) c_l.
struct GpAdapted {
  CoefficientSet coeff;
  double residual = 0.0;  ///< max_p |h_p0 + N v_p000| after rotation
  int iterations = 0;
};

GpAdapted gp_adapt(const CoefficientSet& c, int n_cap);

/// With GP-adapted coefficients the linear piece reduces to
///   -(1/sqrt N) sum_p N v_p000 b*_p (Ncal + 1) + h.c.
/// Returns the max-entry deviation between the two.
double linear_term_reduction(const CoefficientSet& adapted, int n_cap);

LemmaReport to_report(const IdentitySuite& suite, const std::string& id, double tol);

}  // namespace gpregime::fock
