#pragma once

#include <array>
#include <map>
#include <string>

#include <Eigen/Core>

#include "json.hpp"

namespace magspec::geometry {

/// Real polynomial in (x, y, z), stored as exponent triple -> coefficient.
/// Exact zeros are pruned, so two polynomials compare equal exactly when
/// their term maps do.
class Polynomial3 {
 public:
  using Exponent = std::array<int, 3>;
  using Terms = std::map<Exponent, double>;

  Polynomial3() = default;
  explicit Polynomial3(Terms terms);

  static Polynomial3 constant(double c);
  static Polynomial3 monomial(double c, int i, int j, int k);
  static Polynomial3 variable(int axis);

  double evaluate(double x, double y, double z) const;
  double operator()(const Eigen::Vector3d& p) const { return evaluate(p.x(), p.y(), p.z()); }

  Polynomial3 derivative(int axis) const;
  /// d^2/(dx_a dx_b) with each coefficient scaled by one integer product,
  /// so the result does not depend on the order of a and b.
  Polynomial3 mixed_partial(int a, int b) const;
  /// Antiderivative in one variable that vanishes where that variable is 0.
  Polynomial3 antiderivative(int axis) const;
  /// Substitutes x_axis = value.
  Polynomial3 restrict(int axis, double value) const;

  Polynomial3& operator+=(const Polynomial3& o);
  Polynomial3& operator-=(const Polynomial3& o);
  friend Polynomial3 operator+(Polynomial3 a, const Polynomial3& b) { return a += b; }
  friend Polynomial3 operator-(Polynomial3 a, const Polynomial3& b) { return a -= b; }
  friend Polynomial3 operator*(const Polynomial3& a, const Polynomial3& b);
  friend Polynomial3 operator*(double c, const Polynomial3& a);
  Polynomial3 pow(int n) const;

  int degree() const;
  bool is_zero() const { return terms_.empty(); }
  double max_abs_coefficient() const;
  const Terms& terms() const { return terms_; }
  bool operator==(const Polynomial3& o) const { return terms_ == o.terms_; }

  std::string to_string() const;
  nlohmann::json to_json() const;
  static Polynomial3 from_json(const nlohmann::json& j);

 private:
  void add_term(const Exponent& e, double c);
  Terms terms_;
};

using VectorPolynomial = std::array<Polynomial3, 3>;

/// Symbolic curl (dy P3 - dz P2, dz P1 - dx P3, dx P2 - dy P1).
VectorPolynomial curl(const VectorPolynomial& a);
Polynomial3 divergence(const VectorPolynomial& b);
/// Curl of grad(phi) built from symmetric mixed partials: identically zero.
VectorPolynomial curl_of_gradient(const Polynomial3& phi);
VectorPolynomial gradient(const Polynomial3& phi);

}  // namespace magspec::geometry
