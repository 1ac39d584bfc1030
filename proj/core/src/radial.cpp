#include "gpregime/radial.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gpregime/error.hpp"
#include "gpregime/numerics.hpp"

namespace gpregime {

RadialProfile RadialProfile::sample(std::vector<double> grid, const ClosedForm& fn, TailKind tail,
                                    double tail_radius) {
  std::vector<double> samples(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    samples[i] = (tail == TailKind::Zero && grid[i] > tail_radius) ? 0.0 : fn(grid[i]);
  }
  return from_samples(std::move(grid), std::move(samples), tail, tail_radius,
                      tail == TailKind::Analytic ? fn : ClosedForm{});
}

RadialProfile RadialProfile::from_samples(std::vector<double> grid, std::vector<double> samples,
                                          TailKind tail, double tail_radius,
                                          ClosedForm closed_form) {
  RadialProfile p;
  p.grid_ = std::move(grid);
  p.samples_ = std::move(samples);
  p.tail_ = tail;
  p.tail_radius_ = tail_radius;
  p.closed_form_ = std::move(closed_form);
  p.validate();
  return p;
}

void RadialProfile::validate() const {
  require(grid_.size() >= 16, ErrorKind::InvalidParameter, "radial grid needs at least 16 nodes");
  require(samples_.size() == grid_.size(), ErrorKind::InvalidParameter,
          "sample count does not match grid");
  require(grid_.front() >= 0.0, ErrorKind::InvalidParameter, "radial grid must start at r >= 0");
  for (std::size_t i = 1; i < grid_.size(); ++i) {
    require(grid_[i] > grid_[i - 1], ErrorKind::InvalidParameter,
            "radial grid must be strictly increasing (node " + std::to_string(i) + ")");
  }
  if (tail_ == TailKind::Zero) {
    for (std::size_t i = 0; i < grid_.size(); ++i) {
      require(grid_[i] <= tail_radius_ || samples_[i] == 0.0, ErrorKind::InvalidParameter,
              "compact-support profile is non-zero beyond its support radius");
    }
  } else {
    require(static_cast<bool>(closed_form_), ErrorKind::InvalidParameter,
            "analytic tail needs a closed form");
  }
}

double RadialProfile::operator()(double r) const {
  if (tail_ == TailKind::Zero && r > tail_radius_) return 0.0;
  if (tail_ == TailKind::Analytic && r > tail_radius_) return closed_form_(r);
  if (r <= grid_.front()) return samples_.front();
  if (r >= grid_.back()) return tail_ == TailKind::Analytic ? closed_form_(r) : samples_.back();
  auto it = std::upper_bound(grid_.begin(), grid_.end(), r);
  const auto i = static_cast<std::size_t>(it - grid_.begin()) - 1;
  const double t = (r - grid_[i]) / (grid_[i + 1] - grid_[i]);
  return (1.0 - t) * samples_[i] + t * samples_[i + 1];
}

double radial_volume_integral(const RadialProfile& profile) {
  const auto& r = profile.grid();
  const auto& f = profile.samples();
  double sum = 0.0;
  for (std::size_t i = 1; i < r.size(); ++i) {
    sum += 0.5 * (f[i] * r[i] * r[i] + f[i - 1] * r[i - 1] * r[i - 1]) * (r[i] - r[i - 1]);
  }
  return 4.0 * numerics::pi * sum;
}

}  // namespace gpregime
