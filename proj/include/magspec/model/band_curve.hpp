#pragma once

#include <array>
#include <atomic>
#include <cstddef>
#include <iosfwd>
#include <memory>
#include <vector>

#include "json.hpp"
#include "magspec/model/lupan.hpp"

namespace magspec::model {

/// One solved point of the band function together with the box it used.
struct BandSample {
  double theta = 0.0;
  double energy = 0.0;
  HalfPlaneGrid grid;
  double edge_mass = 0.0;
  std::size_t unknowns = 0;
};

/// Monotone (Fritsch-Carlson) cubic interpolant of theta -> e(theta).
///
/// Knots are the samples plus the two analytic endpoint values
/// (0, theta0_value) and (pi/2, 1). Queries use the even extension
/// e(-theta) = e(theta); queries outside the sampled theta range are
/// answered from the anchor segments and trigger a one-time warning,
/// which keeps every value inside [theta0_value, 1].
class BandCurve {
 public:
  BandCurve() = default;
  BandCurve(std::vector<BandSample> samples, double theta0_value, nlohmann::json provenance = {});

  double evaluate(double theta) const;
  double operator()(double theta) const { return evaluate(theta); }
  /// Analytic derivative of the interpolant, odd in theta.
  double derivative(double theta) const;
  /// Second derivative of the cubic piece containing |theta| (even in theta).
  double second_derivative(double theta) const;
  bool in_sampled_range(double theta) const;

  const std::vector<BandSample>& samples() const { return samples_; }
  std::vector<double> thetas() const;
  std::vector<double> energies() const;
  double theta0_value() const { return theta0_; }
  const std::vector<double>& knot_thetas() const { return kx_; }
  const std::vector<double>& knot_values() const { return ky_; }
  const std::vector<double>& knot_slopes() const { return km_; }
  /// Per-interval cubic coefficients c0 + c1 u + c2 u^2 + c3 u^3, u = theta - knot.
  std::vector<std::array<double, 4>> coefficients() const;
  const nlohmann::json& provenance() const { return provenance_; }

  void write_csv(std::ostream& os) const;
  nlohmann::json to_json() const;
  static BandCurve from_json(const nlohmann::json& j);

 private:
  std::size_t interval(double x) const;

  std::vector<BandSample> samples_;
  double theta0_ = 0.0;
  std::vector<double> kx_, ky_, km_;
  nlohmann::json provenance_;
  std::shared_ptr<std::atomic<bool>> warned_ = std::make_shared<std::atomic<bool>>(false);
};

/// 25 equispaced angles on [0.04, 1.2].
std::vector<double> default_band_thetas();

/// Samples lupan_energy on one fixed grid; thetas must be sorted in (0, pi/2).
BandCurve build_band_curve(const std::vector<double>& thetas, const HalfPlaneGrid& grid = {},
                           const LuPanOptions& options = {});

/// Samples lupan_energy_auto, so each angle gets a box sized for it.
BandCurve build_band_curve_auto(const std::vector<double>& thetas, const AutoBoxOptions& options = {});

}  // namespace magspec::model
