#pragma once

#include <cstddef>
#include <iosfwd>
#include <memory>
#include <vector>

#include <Eigen/Core>

#include "magspec/geometry/chart.hpp"
#include "magspec/geometry/magnetic_field.hpp"
#include "magspec/model/band_curve.hpp"

namespace magspec::geometry {

/// Unit tangential field direction b_par / |b_par| at x(p).
/// AssumptionError when |b_par| <= 1e-6.
Eigen::Vector3d tangent_direction(const BoundaryChart& chart, const MagneticField& field, const Eigen::Vector2d& p);

struct CurveSample {
  double s = 0.0;
  Eigen::Vector2d p;
  Eigen::Vector3d x, tangent, normal;
};

struct FieldLine {
  ChartPtr chart;
  MagneticField field;
  double step = 0.0;
  int substeps = 1;
  std::vector<CurveSample> samples;  // ascending s, s = k * step
  std::size_t origin = 0;            // index of s = 0
  double max_surface_residual = 0.0;
  bool truncated = false;
};

/// RK4 integration of s -> gamma(s) with gamma' = tangent_direction, every
/// stage point reprojected to the surface. Samples s = k step covering
/// [s_min, s_max] (which must contain 0); each sample interval is split in
/// `substeps` RK4 steps. Leaving the chart domain truncates with a warning.
FieldLine field_line(ChartPtr chart, const MagneticField& field, const Eigen::Vector2d& p0, double s_min,
                     double s_max, double step, int substeps = 1);

/// Adapted (r, s) coordinates sampled on a grid, plus the field data once
/// frame_fields has run. Node (i, j) has r = r_grid[i], s = s_grid[j].
struct AdaptedFrame {
  ChartPtr chart;
  MagneticField field;
  Eigen::Vector2d origin;
  int substeps = 1;
  std::vector<double> r_grid, s_grid;
  std::size_t r_origin = 0, s_origin = 0;

  std::vector<Eigen::Vector2d> chart_point;
  std::vector<Eigen::Vector3d> gamma, d_r, d_s, normal, dn_r, dn_s;
  std::vector<double> alpha;

  std::vector<double> B1, B2, B3, theta, beta, norm_b;
  std::vector<double> F;
  std::shared_ptr<const model::BandCurve> band;

  double max_surface_residual = 0.0;

  std::size_t nr() const { return r_grid.size(); }
  std::size_t ns() const { return s_grid.size(); }
  std::size_t index(std::size_t i, std::size_t j) const { return i * s_grid.size() + j; }
  double dr() const { return r_grid.size() > 1 ? r_grid[1] - r_grid[0] : 0.0; }
  double ds() const { return s_grid.size() > 1 ? s_grid[1] - s_grid[0] : 0.0; }
  bool has_fields() const { return !theta.empty(); }
};

/// Geodesics r -> gamma(r, s) leaving gamma(s) with velocity gamma'(s) x n, so
/// (d_r gamma, d_s gamma, n) is direct. Integrates gamma'' = -K(gamma', gamma') n
/// by RK4 with reprojection; r = k step on [-r_half, r_half]. d_s gamma comes
/// from neighbouring geodesics launched at s +- 1e-4. Leaving the chart shrinks
/// the common r range with a warning.
AdaptedFrame geodesic_family(const FieldLine& gamma, double r_half, double step);

/// Fills B1 = <B, d_r gamma>, B2 = <B, d_s gamma> / alpha, B3 = -<B, n>,
/// theta = asin(<B, n> / |B|) and beta = |B| e(theta).
/// AssumptionError when theta leaves (0, pi/2) anywhere on the patch.
AdaptedFrame frame_fields(AdaptedFrame frame, std::shared_ptr<const model::BandCurve> band);

/// F(r, s) = int_0^r |g|^{1/2} B3 (l, s, 0) dl by composite Simpson
/// (3/8 rule on the last three panels for odd counts). Stored in frame.F.
std::vector<double> F_integral(AdaptedFrame& frame);

/// Everything in one call.
struct FrameSpec {
  ChartPtr chart;
  MagneticField field;
  Eigen::Vector2d origin{0.0, 0.0};
  double r_half = 0.5;
  double s_half = 0.5;
  double step = 0.05;
  int substeps = 5;
};
AdaptedFrame build_frame(const FrameSpec& spec, std::shared_ptr<const model::BandCurve> band);

/// Tubular-map data at (r, s, t) with Gamma = gamma - t n.
struct TubularPoint {
  Eigen::Vector3d position;
  Eigen::Matrix3d jacobian;  // columns d_r Gamma, d_s Gamma, d_t Gamma
  double sqrt_det_g = 0.0;   // |det jacobian|
  Eigen::Vector3d frame_field;  // jacobian^{-1} B(Gamma)
};
TubularPoint tubular_point(const AdaptedFrame& frame, std::size_t node, double t);

struct FrameInvariants {
  double unit_speed = 0.0;         // max | |d_r gamma| - 1 |
  double orthogonality = 0.0;      // max |<d_r gamma, d_s gamma>|
  double alpha_on_axis = 0.0;      // max |alpha(0, s) - 1|
  double alpha_slope_on_axis = 0.0;  // max |d_s alpha(0, s)|, central differences
  double b1_on_axis = 0.0;         // max |B1(0, s)|
  double min_b2_on_axis = 0.0;
  double norm_identity = 0.0;      // max relative error of |B|^2 = B1^2 + alpha B2^2 + B3^2
  double remark_b2 = 0.0;          // max |B2(0, s) - |B| cos theta|
  double remark_b3 = 0.0;          // max |B3(0, s) + |B| sin theta|
  double metric_block = 0.0;       // max |G13|, |G23|, |G33 - 1| over the t values
  bool direct_basis = true;        // det[d_r gamma, d_s gamma, n] > 0 on r = 0
  double surface_residual = 0.0;
};
FrameInvariants check_invariants(const AdaptedFrame& frame, const std::vector<double>& t_values = {0.0, 0.1});

/// Point evaluation of the adapted coordinates off the sampling grid. Both
/// ODEs use a fixed number of RK4 steps per unit of range, so the map is a
/// smooth function of (r, s).
struct FramePoint {
  Eigen::Vector2d p;
  Eigen::Vector3d x, d_r, normal;
};

class AdaptedCoordinates {
 public:
  AdaptedCoordinates(ChartPtr chart, MagneticField field, Eigen::Vector2d origin, double r_half, double s_half,
                     double step);
  FramePoint point(double r, double s) const;
  const BoundaryChart& chart() const { return *chart_; }
  ChartPtr chart_ptr() const { return chart_; }
  const MagneticField& field() const { return field_; }
  const Eigen::Vector2d& origin() const { return origin_; }
  double r_half() const { return r_half_; }
  double s_half() const { return s_half_; }
  double step() const { return step_; }

 private:
  ChartPtr chart_;
  MagneticField field_;
  Eigen::Vector2d origin_;
  double r_half_, s_half_, step_;
  int n_r_, n_s_;
};

/// Wide CSV: r,s,x,y,z,alpha,B1,B2,B3,theta,beta,normB,F.
void write_frame_csv(const AdaptedFrame& frame, std::ostream& os);

}  // namespace magspec::geometry
