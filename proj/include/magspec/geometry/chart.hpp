#pragma once

#include <array>
#include <memory>
#include <string>

#include <Eigen/Core>

#include "json.hpp"
#include "magspec/error.hpp"
#include "magspec/geometry/polynomial.hpp"

namespace magspec::geometry {

class GeometryError : public AssumptionError {
 public:
  using AssumptionError::AssumptionError;
};

/// Chart value with first and second parameter derivatives.
struct SurfacePoint {
  Eigen::Vector3d x, d1, d2, d11, d12, d22;
};

/// Parameterized boundary patch p -> x(p) of a domain {level < 0}.
/// The outward normal is the unit normal pointing along grad(level).
class BoundaryChart {
 public:
  BoundaryChart(Eigen::Vector2d p_min, Eigen::Vector2d p_max) : p_min_(p_min), p_max_(p_max) {}
  virtual ~BoundaryChart() = default;

  virtual std::string name() const = 0;
  virtual SurfacePoint evaluate(const Eigen::Vector2d& p) const = 0;
  virtual double level(const Eigen::Vector3d& x) const = 0;
  virtual Eigen::Vector3d level_gradient(const Eigen::Vector3d& x) const = 0;
  virtual nlohmann::json to_json() const;

  const Eigen::Vector2d& p_min() const { return p_min_; }
  const Eigen::Vector2d& p_max() const { return p_max_; }
  bool contains(const Eigen::Vector2d& p) const;

  /// Outward unit normal; GeometryError when d1 x d2 degenerates.
  Eigen::Vector3d normal(const Eigen::Vector2d& p) const;
  Eigen::Matrix2d first_form(const Eigen::Vector2d& p) const;
  /// II_ij = <dn(d_i), d_j> = -<n, d_ij x> in the chart basis.
  Eigen::Matrix2d second_form(const Eigen::Vector2d& p) const;
  /// dn(u) for a tangent vector u at x(p).
  Eigen::Vector3d shape_operator(const Eigen::Vector2d& p, const Eigen::Vector3d& u) const;
  /// Closest chart point to y by three Gauss-Newton steps from the guess.
  Eigen::Vector2d project(const Eigen::Vector3d& y, Eigen::Vector2d guess) const;
  /// Distance-like violation |level| / |grad level| of a point.
  double surface_residual(const Eigen::Vector3d& x) const;

 protected:
  Eigen::Vector2d p_min_, p_max_;
};

using ChartPtr = std::shared_ptr<const BoundaryChart>;

/// Plane z = 0 of the half space z < 0, optionally rotated about the z axis.
class PlaneChart : public BoundaryChart {
 public:
  explicit PlaneChart(double rotation = 0.0, double half_extent = 10.0);
  std::string name() const override { return "plane"; }
  SurfacePoint evaluate(const Eigen::Vector2d& p) const override;
  double level(const Eigen::Vector3d& x) const override { return x.z(); }
  Eigen::Vector3d level_gradient(const Eigen::Vector3d&) const override { return Eigen::Vector3d::UnitZ(); }
  nlohmann::json to_json() const override;

 private:
  double c_, s_, rotation_;
};

/// Ellipsoid sum (x_i / a_i)^2 = 1 in latitude/longitude coordinates
/// p = (u, v) about a chosen polar axis k:
///   x_{k+1} = a_{k+1} cos v cos u, x_{k+2} = a_{k+2} cos v sin u, x_k = a_k sin v
/// (indices mod 3). The chart is regular for |v| < pi/2.
class EllipsoidChart : public BoundaryChart {
 public:
  EllipsoidChart(Eigen::Vector3d axes, int polar_axis = 2, double max_latitude = 1.45);
  std::string name() const override;
  SurfacePoint evaluate(const Eigen::Vector2d& p) const override;
  double level(const Eigen::Vector3d& x) const override;
  Eigen::Vector3d level_gradient(const Eigen::Vector3d& x) const override;
  nlohmann::json to_json() const override;
  const Eigen::Vector3d& axes() const { return axes_; }
  int polar_axis() const { return k_; }
  /// Chart coordinates of a point lying on the ellipsoid.
  Eigen::Vector2d coordinates_of(const Eigen::Vector3d& x) const;

 private:
  Eigen::Vector3d axes_;
  int k_;
};

std::shared_ptr<EllipsoidChart> sphere_chart(int polar_axis = 2);

/// Graph z = f(x, y) of the domain z < f, with f a polynomial in (x, y).
class GraphChart : public BoundaryChart {
 public:
  explicit GraphChart(Polynomial3 f, double half_extent = 10.0);
  std::string name() const override { return "graph"; }
  SurfacePoint evaluate(const Eigen::Vector2d& p) const override;
  double level(const Eigen::Vector3d& x) const override;
  Eigen::Vector3d level_gradient(const Eigen::Vector3d& x) const override;
  nlohmann::json to_json() const override;

 private:
  Polynomial3 f_, fx_, fy_, fxx_, fxy_, fyy_;
};

/// Shape operator in an orthonormal tangent frame (e1 along d1): symmetric,
/// the identity on the unit sphere with outward normal.
Eigen::Matrix2d weingarten(const BoundaryChart& chart, const Eigen::Vector2d& p);

}  // namespace magspec::geometry
