#include "gpregime/potentials.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "gpregime/error.hpp"
#include "gpregime/numerics.hpp"

namespace gpregime::potentials {
namespace {

using numerics::pi;

// Uniform nodes on [0, 2R] with R itself a node.
std::vector<double> well_grid(double radius, std::size_t n_pts) {
  const std::size_t inner = std::max<std::size_t>(n_pts / 2 + 1, 2);
  auto grid = numerics::linspace(0.0, radius, inner);
  const std::size_t outer = std::max<std::size_t>(n_pts - inner + 1, 2);
  auto tail = numerics::linspace(radius, 2.0 * radius, outer);
  grid.insert(grid.end(), tail.begin() + 1, tail.end());
  return grid;
}

double l3_norm_of(const InteractionPotential& v) {
  const auto& r = v.profile.grid();
  double sum = 0.0;
  for (std::size_t i = 1; i < r.size(); ++i) {
    const double lo = r[i - 1];
    const double hi = std::min(r[i], v.support_radius);
    if (hi <= lo) break;
    sum += numerics::integrate(
        [&](double x) {
          const double val = std::abs(v(x));
          return val * val * val * x * x;
        },
        lo, hi);
  }
  return std::cbrt(4.0 * pi * sum);
}

InteractionPotential make_closed_form(InteractionKind kind, double v0, double radius,
                                      std::size_t n_pts) {
  require(radius > 0.0, ErrorKind::InvalidParameter, "support radius must be positive");
  require(v0 >= 0.0, ErrorKind::InvalidParameter, "interaction strength must be non-negative");
  require(n_pts >= 16, ErrorKind::InvalidParameter, "need at least 16 grid points");
  InteractionPotential v;
  v.kind = kind;
  v.strength = v0;
  v.support_radius = radius;
  v.profile = RadialProfile::sample(
      well_grid(radius, n_pts), [&](double r) { return v(r); }, TailKind::Zero, radius);
  v.l3_norm = l3_norm_of(v);
  return v;
}

}  // namespace

double InteractionPotential::operator()(double r) const {
  if (r > support_radius) return 0.0;
  switch (kind) {
    case InteractionKind::SquareWell: return strength;
    case InteractionKind::SmoothBump: {
      const double s = 1.0 - (r * r) / (support_radius * support_radius);
      return strength * s * s;
    }
    case InteractionKind::Tabulated: return profile(r);
  }
  return 0.0;
}

bool InteractionPotential::is_zero() const {
  if (kind != InteractionKind::Tabulated) return strength == 0.0;
  const auto& s = profile.samples();
  return std::all_of(s.begin(), s.end(), [](double x) { return x == 0.0; });
}

InteractionPotential make_square_well(double v0, double radius, std::size_t n_pts) {
  return make_closed_form(InteractionKind::SquareWell, v0, radius, n_pts);
}

InteractionPotential make_smooth_bump(double v0, double radius, std::size_t n_pts) {
  return make_closed_form(InteractionKind::SmoothBump, v0, radius, n_pts);
}

InteractionPotential make_tabulated(RadialProfile profile) {
  require(profile.tail() == TailKind::Zero, ErrorKind::InvalidParameter,
          "interaction profile must have compact support");
  InteractionPotential v;
  v.kind = InteractionKind::Tabulated;
  v.support_radius = profile.tail_radius();
  v.profile = std::move(profile);
  v.l3_norm = l3_norm_of(v);
  return v;
}

double TrapPotential::operator()(double r) const {
  return kind == TrapKind::Harmonic ? r * r : r * r * r * r;
}

double TrapPotential::radial_derivative(double r) const {
  return kind == TrapKind::Harmonic ? 2.0 * r : 4.0 * r * r * r;
}

double TrapPotential::laplacian_value(double r) const {
  return kind == TrapKind::Harmonic ? 6.0 : 20.0 * r * r;
}

double TrapPotential::harmonic_frequency() const {
  // Quartic: match the curvature at the classical radius of the ground state.
  return kind == TrapKind::Harmonic ? 1.0 : 1.5;
}

TrapPotential make_trap(TrapKind kind, std::size_t n_pts, double r_max) {
  require(r_max > 0.0, ErrorKind::InvalidParameter, "trap r_max must be positive");
  require(n_pts >= 16, ErrorKind::InvalidParameter, "need at least 16 grid points");
  TrapPotential t;
  t.kind = kind;
  // |x+y|^2 <= 2|x|^2 + 2|y|^2 and |x+y|^4 <= 8(|x|^4 + |y|^4).
  t.growth_constant = kind == TrapKind::Harmonic ? 2.0 : 8.0;
  const auto grid = numerics::linspace(0.0, r_max, n_pts);
  t.profile = RadialProfile::sample(grid, [t](double r) { return t(r); }, TailKind::Analytic, r_max);
  t.gradient = RadialProfile::sample(
      grid, [t](double r) { return t.radial_derivative(r); }, TailKind::Analytic, r_max);
  t.laplacian = RadialProfile::sample(
      grid, [t](double r) { return t.laplacian_value(r); }, TailKind::Analytic, r_max);
  return t;
}

TrapPotential make_trap(std::string_view kind, std::size_t n_pts, double r_max) {
  if (kind == "harmonic") return make_trap(TrapKind::Harmonic, n_pts, r_max);
  if (kind == "quartic") return make_trap(TrapKind::Quartic, n_pts, r_max);
  fail(ErrorKind::InvalidParameter, "unknown trap kind '" + std::string(kind) + "'");
}

bool ValidationReport::all_pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.pass; });
}

const ValidationCheck* ValidationReport::find(std::string_view name) const {
  for (const auto& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

ValidationReport validate(const InteractionPotential& v) {
  ValidationReport report;
  const auto& r = v.profile.grid();
  const auto& s = v.profile.samples();

  ValidationCheck nonneg{"nonnegative", true, 0.0, -1, ""};
  nonneg.witness = *std::min_element(s.begin(), s.end());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] < 0.0) {
      nonneg.pass = false;
      nonneg.node = static_cast<long>(i);
      nonneg.witness = s[i];
      nonneg.detail = "V(r) < 0 at r = " + std::to_string(r[i]);
      break;
    }
  }
  report.checks.push_back(nonneg);

  ValidationCheck support{"compact_support", v.profile.tail() == TailKind::Zero,
                          v.support_radius, -1, ""};
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (r[i] > v.support_radius && s[i] != 0.0) {
      support.pass = false;
      support.node = static_cast<long>(i);
      break;
    }
  }
  report.checks.push_back(support);

  report.checks.push_back(
      {"l3_finite", std::isfinite(v.l3_norm), v.l3_norm, -1, "(4 pi int V^3 r^2 dr)^(1/3)"});
  report.checks.push_back({"spherical_symmetry", true, 0.0, -1, "radial by construction"});
  return report;
}

double submultiplicativity_constant(const TrapPotential& trap, int half_width, double spacing) {
  std::vector<std::array<double, 3>> pts;
  for (int i = -half_width; i <= half_width; ++i)
    for (int j = -half_width; j <= half_width; ++j)
      for (int k = -half_width; k <= half_width; ++k)
        pts.push_back({i * spacing, j * spacing, k * spacing});

  std::vector<double> vals(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto& p = pts[i];
    vals[i] = trap.profile(std::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]));
  }

  double c = 0.0;
  auto holds = [](double cc, double a, double b, double sum) {
    return cc * (a + cc) * (b + cc) >= sum;
  };
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = i; j < pts.size(); ++j) {
      const double dx = pts[i][0] + pts[j][0];
      const double dy = pts[i][1] + pts[j][1];
      const double dz = pts[i][2] + pts[j][2];
      const double sum = trap.profile(std::sqrt(dx * dx + dy * dy + dz * dz));
      const double a = vals[i];
      const double b = vals[j];
      if (holds(c, a, b, sum)) continue;
      double lo = c;
      double hi = std::max(1.0, 2.0 * c);
      while (!holds(hi, a, b, sum)) hi *= 2.0;
      for (int it = 0; it < 100 && hi - lo > 1e-14 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (holds(mid, a, b, sum) ? hi : lo) = mid;
      }
      c = hi;
    }
  }
  return c;
}

double fitted_exponential_rate(const RadialProfile& g) {
  const auto& r = g.grid();
  const auto& s = g.samples();
  double sx = 0, sy = 0, sxx = 0, sxy = 0, n = 0;
  for (std::size_t i = r.size() / 2; i < r.size(); ++i) {
    if (s[i] == 0.0) continue;
    const double y = std::log(std::abs(s[i]));
    sx += r[i];
    sy += y;
    sxx += r[i] * r[i];
    sxy += r[i] * y;
    n += 1;
  }
  if (n < 2) return 0.0;
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

ValidationReport validate(const TrapPotential& trap) {
  ValidationReport report;
  const auto& r = trap.profile.grid();
  const auto& s = trap.profile.samples();

  // Monotone growth beyond the last local minimum, and large at the edge.
  std::size_t start = 0;
  for (std::size_t i = 1; i < s.size(); ++i)
    if (s[i] < s[i - 1]) start = i;
  ValidationCheck growth{"diverges_at_infinity", true, s.back(), -1, ""};
  for (std::size_t i = start + 1; i < s.size(); ++i) {
    if (s[i] <= s[i - 1]) {
      growth.pass = false;
      growth.node = static_cast<long>(i);
    }
  }
  const double far = trap.profile(4.0 * r.back());
  growth.pass = growth.pass && far > s.back() && s.back() > s[start];
  growth.detail = "monotone increasing on [" + std::to_string(r[start]) + ", r_max]";
  report.checks.push_back(growth);

  const double c_min = submultiplicativity_constant(trap);
  report.checks.push_back({"submultiplicative", c_min <= trap.growth_constant, c_min, -1,
                           "minimal C on lattice {-5..5}^3 vs declared C = " +
                               std::to_string(trap.growth_constant)});

  const double grad_rate = fitted_exponential_rate(trap.gradient);
  const double lap_rate = fitted_exponential_rate(trap.laplacian);
  report.checks.push_back({"gradient_growth_rate", std::isfinite(grad_rate), grad_rate, -1,
                           "fitted exponential rate of |grad V_ext| (recorded, not asserted)"});
  report.checks.push_back({"laplacian_growth_rate", std::isfinite(lap_rate), lap_rate, -1,
                           "fitted exponential rate of |Laplacian V_ext| (recorded, not asserted)"});
  report.checks.push_back({"spherical_symmetry", true, 0.0, -1, "radial by construction"});
  return report;
}

nlohmann::json to_json(const InteractionPotential& v) {
  nlohmann::json j;
  const auto n = v.profile.size();
  switch (v.kind) {
    case InteractionKind::SquareWell: j["kind"] = "square_well"; break;
    case InteractionKind::SmoothBump: j["kind"] = "smooth_bump"; break;
    case InteractionKind::Tabulated: j["kind"] = "tabulated"; break;
  }
  if (v.kind == InteractionKind::Tabulated) {
    j["parameters"] = {{"R", v.support_radius}, {"samples", v.profile.samples()}};
    j["grid"] = {{"nodes", v.profile.grid()}};
  } else {
    j["parameters"] = {{"V0", v.strength}, {"R", v.support_radius}};
    j["grid"] = {{"n_pts", n}};
  }
  return j;
}

nlohmann::json to_json(const TrapPotential& trap) {
  return {{"kind", trap.kind == TrapKind::Harmonic ? "harmonic" : "quartic"},
          {"parameters", nlohmann::json::object()},
          {"grid", {{"n_pts", trap.profile.size()}, {"r_max", trap.profile.grid().back()}}}};
}

AnyPotential potential_from_json(const nlohmann::json& j) {
  try {
    const std::string kind = j.at("kind").get<std::string>();
    const auto& grid = j.at("grid");
    if (kind == "harmonic" || kind == "quartic") {
      return make_trap(kind, grid.at("n_pts").get<std::size_t>(), grid.at("r_max").get<double>());
    }
    const auto& params = j.at("parameters");
    if (kind == "square_well" || kind == "smooth_bump") {
      const double v0 = params.at("V0").get<double>();
      const double radius = params.at("R").get<double>();
      const auto n = grid.at("n_pts").get<std::size_t>();
      return kind == "square_well" ? make_square_well(v0, radius, n)
                                   : make_smooth_bump(v0, radius, n);
    }
    if (kind == "tabulated") {
      auto profile = RadialProfile::from_samples(grid.at("nodes").get<std::vector<double>>(),
                                                 params.at("samples").get<std::vector<double>>(),
                                                 TailKind::Zero, params.at("R").get<double>());
      return make_tabulated(std::move(profile));
    }
    fail(ErrorKind::ConfigError, "unknown potential kind '" + kind + "'");
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::ConfigError, std::string("malformed potential JSON: ") + e.what());
  }
}

AnyPotential load_potential(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::ConfigError, "cannot open potential file " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::ConfigError, "cannot parse " + path + ": " + e.what());
  }
  return potential_from_json(j);
}

}  // namespace gpregime::potentials
