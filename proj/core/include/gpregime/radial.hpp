#pragma once

#include <functional>
#include <vector>

namespace gpregime {

/// How a sampled radial profile continues past its grid.
enum class TailKind {
  Zero,      ///< identically zero for r > tail_radius (compact support)
  Analytic,  ///< given by a closed form for r > tail_radius
};

/// A radial function f(|x|) sampled on a strictly increasing grid, in units
/// where hbar = 2m = 1. Immutable after construction.
class RadialProfile {
 public:
  using ClosedForm = std::function<double(double)>;

  RadialProfile() = default;

  /// Samples `fn` on `grid`. For `TailKind::Zero` the samples past
  /// `tail_radius` are forced to zero; for `TailKind::Analytic`, `fn` is kept
  /// and used as the closed form beyond `tail_radius`.
  static RadialProfile sample(std::vector<double> grid, const ClosedForm& fn, TailKind tail,
                              double tail_radius);

  /// Wraps pre-computed samples (validated).
  static RadialProfile from_samples(std::vector<double> grid, std::vector<double> samples,
                                    TailKind tail, double tail_radius,
                                    ClosedForm closed_form = {});

  /// Linear interpolation inside the grid; tail rule outside.
  double operator()(double r) const;

  const std::vector<double>& grid() const { return grid_; }
  const std::vector<double>& samples() const { return samples_; }
  TailKind tail() const { return tail_; }
  double tail_radius() const { return tail_radius_; }
  std::size_t size() const { return grid_.size(); }

 private:
  void validate() const;

  std::vector<double> grid_;
  std::vector<double> samples_;
  TailKind tail_ = TailKind::Zero;
  double tail_radius_ = 0.0;
  ClosedForm closed_form_;
};

/// 4 pi \int f(r) r^2 dr over the sampled grid (trapezoid on the samples).
double radial_volume_integral(const RadialProfile& profile);

}  // namespace gpregime
