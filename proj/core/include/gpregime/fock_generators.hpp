#pragma once

#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "gpregime/expm.hpp"
#include "gpregime/fock_ops.hpp"

namespace gpregime::fock {

/// B = 1/2 sum eta_ij (b*_i b*_j - b_i b_j). eta must be real symmetric.
SparseOp<Complex> build_B(const std::shared_ptr<const FockSpace>& space, const Eigen::MatrixXd& eta);

/// A = N_cap^{-1/2} sum nu_xy g_xz (b*_x a*_y a_z - h.c.).
SparseOp<Complex> build_A(const std::shared_ptr<const FockSpace>& space, const Eigen::MatrixXd& nu,
                          const Eigen::MatrixXd& g);

struct Exponential {
  Eigen::MatrixXcd U;
  numerics::ExpmInfo info;
  double unitarity_defect = 0.0;  ///< max entry of U* U - 1
};

/// e^{t X} for an anti-Hermitian X.
Exponential exp_generator(const SparseOp<Complex>& X, double t = 1.0);

/// lambda_max of (Ncal+1)^{-n/2} U* (Ncal+1)^n U (Ncal+1)^{-n/2}.
double growth_ratio(const FockSpace& space, const Eigen::MatrixXcd& U, int n);

struct GrowthEntry {
  int n_cap = 0;
  int power = 0;
  double scale = 0.0;  ///< ||eta|| for B, t for A
  double ratio = 0.0;
};

struct GrowthTable {
  std::vector<GrowthEntry> entries;
  /// sup over the table restricted to one power
  double sup(int power) const;
  /// sup over one (power, n_cap) column
  double sup(int power, int n_cap) const;
};

/// Fixed direction eta_hat (Frobenius norm 1) scaled to each entry of
/// `norms`, for every n_cap and power.
GrowthTable B_growth(int modes, const std::vector<int>& n_caps, const Eigen::MatrixXd& eta_hat,
                     const std::vector<double>& norms, const std::vector<int>& powers);

/// Generator t A(nu, g) over the t grid.
GrowthTable A_growth(int modes, const std::vector<int>& n_caps, const Eigen::MatrixXd& nu,
                     const Eigen::MatrixXd& g, const std::vector<double>& ts, const std::vector<int>& powers);

/// True when the ratios at every (n_cap, power) are non-decreasing in |scale|
/// up to a relative slack.
bool monotone_in_scale(const GrowthTable& t, double slack = 1e-12);

struct DEtaReport {
  int n_cap = 0;
  Eigen::MatrixXcd d;
  double ratio = 0.0;  ///< sup ||(N+1)^{n/2} d xi|| / (||f|| ||(N+1)^{(n+3)/2} xi||)
  double max_abs = 0.0;
};

/// d = e^{-B} b(f) e^B - b(cosh_eta f) - b*(sinh_eta conj f), with
/// b(f) = sum conj(f_i) b_i.
DEtaReport compute_d_eta(const std::shared_ptr<const FockSpace>& space, const Eigen::MatrixXd& eta,
                         const Eigen::VectorXcd& f, int n = 0);

/// Defect of d against the second-order BCH expansion
///   [b(f), B] + 1/2 [[b(f), B], B] - b(eta^2 f / 2) - b*(eta conj f)
/// at generator scales s and s/2. Third-order agreement gives a ratio near 8.
struct BchCheck {
  double defect_s = 0.0;
  double defect_half = 0.0;
  double ratio = 0.0;
};

BchCheck bch_second_order(const std::shared_ptr<const FockSpace>& space, const Eigen::MatrixXd& eta,
                          const Eigen::VectorXcd& f, double s);

/// max |lambda_k(U* H U) - lambda_k(H)| for Hermitian H.
double spectrum_shift(const SparseOp<Complex>& H, const Eigen::MatrixXcd& U);

}  // namespace gpregime::fock
