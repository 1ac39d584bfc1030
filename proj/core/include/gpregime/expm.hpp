#pragma once

#include <Eigen/Dense>

namespace gpregime::numerics {

struct ExpmInfo {
  int pade_degree = 0;
  int squarings = 0;
  double norm1 = 0.0;
  /// Relative backward-error bound of the Pade approximant in exact
  /// arithmetic (unit roundoff when the theta threshold is met).
  double backward_error_bound = 0.0;
};

/// Matrix exponential by scaling and squaring with diagonal Pade
/// approximants of degree 3..13 (Higham 2005 thresholds). Dimension is capped
/// at 5000; larger inputs throw ResourceLimit.
Eigen::MatrixXcd expm(const Eigen::MatrixXcd& a, ExpmInfo* info = nullptr);
Eigen::MatrixXd expm(const Eigen::MatrixXd& a, ExpmInfo* info = nullptr);

inline constexpr Eigen::Index kExpmMaxDimension = 5000;

}  // namespace gpregime::numerics
