#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "magspec/geometry/polynomial.hpp"

namespace magspec::geometry {

/// Polynomial vector potential A with its exact curl B.
///
/// Gauge terms grad(phi) are kept apart from the base table. B is the curl
/// of the base plus the curl of each gradient, and the latter cancels to
/// an exact zero polynomial, so B is bitwise independent of the gauge.
class MagneticField {
 public:
  MagneticField() = default;
  MagneticField(std::string name, VectorPolynomial potential);

  /// Builds A with A_3 = 0 from a divergence-free B:
  ///   A_1 = int_0^z B_2, A_2 = -int_0^z B_1 + int_0^x B_3(., y, 0).
  /// Rejects B whose symbolic divergence is not zero.
  static MagneticField from_field(std::string name, const VectorPolynomial& b);

  MagneticField with_gauge(const Polynomial3& phi) const;

  const std::string& name() const { return name_; }
  const VectorPolynomial& base_potential() const { return base_; }
  const std::vector<Polynomial3>& gauge_terms() const { return gauges_; }
  /// The full A = base + sum of gradients, as one table.
  VectorPolynomial potential_polynomials() const;
  const VectorPolynomial& field_polynomials() const { return b_; }

  Eigen::Vector3d potential(const Eigen::Vector3d& x) const;
  Eigen::Vector3d field(const Eigen::Vector3d& x) const;
  double strength(const Eigen::Vector3d& x) const { return field(x).norm(); }

  /// Largest coefficient of curl(full A) - B; zero up to rounding.
  double curl_defect() const;
  /// True when the third component of the full potential vanishes identically.
  bool potential_normal_component_vanishes() const;

  nlohmann::json to_json() const;

 private:
  std::string name_;
  VectorPolynomial base_;
  std::vector<Polynomial3> gauges_;
  VectorPolynomial b_;
};

/// Uniform field b with A = (b2 z, b3 x - b1 z, 0).
MagneticField constant_field(const Eigen::Vector3d& b);

/// Field on the half space z < 0 whose boundary trace is
/// F(x, y) (0, cos t0, sin t0), F = 1 + a x^2 + b y^2.
///
/// With w = sin(t0) y - cos(t0) z, G(x, w) = 1 + a x^2 + b w^2 / sin^2(t0)
/// and I(x, w) = int_0^x G:
///   B = (-2 k sin(t0) z I, cos(t0) (1 + k z^2) G, sin(t0) (1 + k z^2) G).
/// G is constant along the direction (0, cos t0, sin t0), so div B = 0, and
/// |B| >= G (1 + k z^2) >= 1 throughout.
MagneticField flat_quadratic_field(double theta0, double a = 0.5, double b = 1.0, double k = 1.0);

/// Linear and quadratic gauge functions of (x, y) used by the gauge tests.
Polynomial3 linear_gauge(double cx, double cy);
Polynomial3 quadratic_gauge(double cxx, double cxy, double cyy);

}  // namespace magspec::geometry
