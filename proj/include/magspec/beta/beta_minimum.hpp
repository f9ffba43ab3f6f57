#pragma once

#include <functional>
#include <memory>
#include <string>

#include <Eigen/Core>

#include "json.hpp"
#include "magspec/geometry/adapted_frame.hpp"
#include "magspec/model/band_curve.hpp"

namespace magspec::beta {

/// Value, gradient and Hessian at a point.
struct Derivatives {
  double value = 0.0;
  Eigen::Vector2d gradient = Eigen::Vector2d::Zero();
  Eigen::Matrix2d hessian = Eigen::Matrix2d::Zero();
};

/// Central differences with steps h and h/2 combined by Richardson
/// extrapolation (fourth order for smooth f).
Derivatives richardson_derivatives(const std::function<double(double, double)>& f, const Eigen::Vector2d& p,
                                   double h);

/// beta(r, s) = |B| e(theta) through the adapted coordinates.
class BetaLandscape {
 public:
  BetaLandscape(geometry::AdaptedCoordinates coords, std::shared_ptr<const model::BandCurve> band);

  struct Sample {
    double norm_b = 0.0, theta = 0.0, beta = 0.0;
  };
  Sample at(double r, double s) const;
  /// |B| and theta are differenced (Richardson, step h); e, e', e'' come
  /// from the spline, so no difference quotient straddles a spline knot.
  Derivatives derivatives(const Eigen::Vector2d& rs, double h) const;

  const geometry::AdaptedCoordinates& coordinates() const { return coords_; }
  const model::BandCurve& band() const { return *band_; }
  std::shared_ptr<const model::BandCurve> band_ptr() const { return band_; }

 private:
  geometry::AdaptedCoordinates coords_;
  std::shared_ptr<const model::BandCurve> band_;
};

struct BetaVerdicts {
  bool localized = false;         // minimum at least two cells inside the patch
  bool hessian_spd = false;
  bool beta_below_b_min = false;  // beta_min < b_min
  bool theta_interior = false;    // theta0 in (0, pi/2)
  bool unique = false;            // every multi-start run lands on p0
  bool all() const { return localized && hessian_spd && beta_below_b_min && theta_interior && unique; }
};

struct BetaMinimum {
  Eigen::Vector2d rs0 = Eigen::Vector2d::Zero();  // in the (r, s) frame of the input patch
  Eigen::Vector2d p0 = Eigen::Vector2d::Zero();   // chart coordinates
  Eigen::Vector3d x0 = Eigen::Vector3d::Zero();
  double beta_min = 0.0;
  double b_min = 0.0;          // margin times the sampled minimum of |B|
  double b_min_sampled = 0.0;
  /// Hessian in the (r, s) coordinates built on the field line through x0,
  /// which are orthonormal at x0.
  Eigen::Matrix2d hessian = Eigen::Matrix2d::Zero();
  double theta0 = 0.0;
  double norm_b0 = 0.0;
  double d0 = 0.0;
  double gap_coeff = 0.0;
  double gradient_norm = 0.0;
  std::size_t newton_iterations = 0;
  std::size_t recentering_rounds = 0;
  double uniqueness_spread = 0.0;
  std::size_t starts_converged = 0;
  BetaVerdicts verdicts;

  nlohmann::json to_json() const;
};

struct MinimizeOptions {
  double margin = 0.999;        // b_min = margin * sampled minimum
  double depth = 0.5;           // |B| is sampled down to this distance from the boundary
  std::size_t depth_layers = 6;
  std::size_t max_newton = 60;
  bool multistart = true;
};

/// Newton refinement of the sampled minimum of frame.beta, then a
/// Hessian evaluation in coordinates recentred at the minimizer.
/// AssumptionError "minimum not localized in patch" when the sampled or
/// refined minimum is within two cells of the patch edge, and
/// "degenerate minimum" when Hess beta is not positive definite.
BetaMinimum minimize_beta(const geometry::AdaptedFrame& frame, const MinimizeOptions& options = {});

/// sqrt(det Hess) / (|B(x0)| sin theta0).
double compute_d0(const BetaMinimum& bm);

}  // namespace magspec::beta
