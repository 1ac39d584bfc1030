#include "gpregime/expm.hpp"

#include <array>
#include <cmath>
#include <limits>

#include "gpregime/error.hpp"

namespace gpregime::numerics {
namespace {

constexpr std::array<double, 5> kTheta = {1.495585217958292e-2, 2.539398330063230e-1,
                                          9.504178996162932e-1, 2.097847961257068e0,
                                          5.371920351148152e0};
constexpr std::array<int, 5> kDegree = {3, 5, 7, 9, 13};

template <typename Mat>
std::array<double, 14> pade_coefficients(int m) {
  std::array<double, 14> b{};
  switch (m) {
    case 3: b = {120., 60., 12., 1.}; break;
    case 5: b = {30240., 15120., 3360., 420., 30., 1.}; break;
    case 7: b = {17297280., 8648640., 1995840., 277200., 25200., 1512., 56., 1.}; break;
    case 9:
      b = {17643225600., 8821612800., 2075673600., 302702400., 30270240.,
           2162160.,     110880.,     3960.,       90.,         1.};
      break;
    default:
      b = {64764752532480000., 32382376266240000., 7771770303897600., 1187353796428800.,
           129060195264000.,   10559470521600.,    670442572800.,    33522128640.,
           1323241920.,        40840800.,          960960.,          16380.,
           182.,               1.};
  }
  return b;
}

template <typename Mat>
Mat pade(const Mat& a, int m) {
  const auto b = pade_coefficients<Mat>(m);
  const Eigen::Index n = a.rows();
  const Mat id = Mat::Identity(n, n);
  const Mat a2 = a * a;
  Mat u, v;
  if (m == 13) {
    const Mat a4 = a2 * a2;
    const Mat a6 = a4 * a2;
    const Mat tu = a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2) + b[7] * a6 + b[5] * a4 +
                   b[3] * a2 + b[1] * id;
    u = a * tu;
    v = a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2) + b[6] * a6 + b[4] * a4 + b[2] * a2 +
        b[0] * id;
  } else {
    Mat power = id;
    Mat tu = Mat::Zero(n, n);
    v = Mat::Zero(n, n);
    for (int k = 0; k <= m; k += 2) {
      tu += b[k + 1] * power;
      v += b[k] * power;
      power = power * a2;
    }
    u = a * tu;
  }
  return (v - u).partialPivLu().solve(v + u);
}

template <typename Mat>
Mat expm_impl(const Mat& a, ExpmInfo* info) {
  require(a.rows() == a.cols(), ErrorKind::InvalidInput, "expm needs a square matrix");
  if (a.rows() > kExpmMaxDimension) {
    fail(ErrorKind::ResourceLimit, "expm dimension exceeds cap of 5000");
  }
  const double norm = a.cwiseAbs().colwise().sum().maxCoeff();
  if (!std::isfinite(norm)) fail(ErrorKind::SolverFailure, "expm input is not finite");

  ExpmInfo local;
  local.norm1 = norm;
  local.backward_error_bound = std::numeric_limits<double>::epsilon() / 2;
  Mat result;
  bool done = false;
  for (std::size_t k = 0; k + 1 < kDegree.size(); ++k) {
    if (norm <= kTheta[k]) {
      local.pade_degree = kDegree[k];
      result = pade(a, kDegree[k]);
      done = true;
      break;
    }
  }
  if (!done) {
    int s = 0;
    if (norm > kTheta[4]) s = static_cast<int>(std::ceil(std::log2(norm / kTheta[4])));
    const Mat scaled = a / std::ldexp(1.0, s);
    result = pade(scaled, 13);
    for (int i = 0; i < s; ++i) result = result * result;
    local.pade_degree = 13;
    local.squarings = s;
  }
  if (!result.allFinite()) fail(ErrorKind::SolverFailure, "expm produced non-finite entries");
  if (info) *info = local;
  return result;
}

}  // namespace

Eigen::MatrixXcd expm(const Eigen::MatrixXcd& a, ExpmInfo* info) { return expm_impl(a, info); }
Eigen::MatrixXd expm(const Eigen::MatrixXd& a, ExpmInfo* info) { return expm_impl(a, info); }

}  // namespace gpregime::numerics
