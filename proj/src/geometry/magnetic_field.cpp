#include "magspec/geometry/magnetic_field.hpp"

#include <cmath>
#include <stdexcept>

#include "magspec/error.hpp"

namespace magspec::geometry {

namespace {

Eigen::Vector3d eval(const VectorPolynomial& v, const Eigen::Vector3d& x) { return {v[0](x), v[1](x), v[2](x)}; }

VectorPolynomial add(VectorPolynomial a, const VectorPolynomial& b) {
  for (int i = 0; i < 3; ++i) a[i] += b[i];
  return a;
}

}  // namespace

MagneticField::MagneticField(std::string name, VectorPolynomial potential)
    : name_(std::move(name)), base_(std::move(potential)), b_(curl(base_)) {}

MagneticField MagneticField::from_field(std::string name, const VectorPolynomial& b) {
  const Polynomial3 div = divergence(b);
  double scale = 0.0;
  for (const auto& c : b) scale = std::max(scale, c.max_abs_coefficient());
  if (div.max_abs_coefficient() > 1e-12 * std::max(1.0, scale))
    throw ConfigError("field '" + name + "' is not divergence-free (div B = " + div.to_string() + ")");
  const Polynomial3 a1 = b[1].antiderivative(2);
  const Polynomial3 a2 = b[2].restrict(2, 0.0).antiderivative(0) - b[0].antiderivative(2);
  return MagneticField(std::move(name), {a1, a2, Polynomial3{}});
}

MagneticField MagneticField::with_gauge(const Polynomial3& phi) const {
  MagneticField out = *this;
  out.gauges_.push_back(phi);
  out.b_ = add(out.b_, curl_of_gradient(phi));
  return out;
}

VectorPolynomial MagneticField::potential_polynomials() const {
  VectorPolynomial a = base_;
  for (const auto& phi : gauges_) a = add(a, gradient(phi));
  return a;
}

Eigen::Vector3d MagneticField::potential(const Eigen::Vector3d& x) const {
  Eigen::Vector3d a = eval(base_, x);
  for (const auto& phi : gauges_) a += eval(gradient(phi), x);
  return a;
}

Eigen::Vector3d MagneticField::field(const Eigen::Vector3d& x) const { return eval(b_, x); }

double MagneticField::curl_defect() const {
  const VectorPolynomial c = curl(potential_polynomials());
  double d = 0.0;
  for (int i = 0; i < 3; ++i) d = std::max(d, (c[i] - b_[i]).max_abs_coefficient());
  return d;
}

bool MagneticField::potential_normal_component_vanishes() const { return potential_polynomials()[2].is_zero(); }

nlohmann::json MagneticField::to_json() const {
  nlohmann::json g = nlohmann::json::array();
  for (const auto& phi : gauges_) g.push_back(phi.to_json());
  return {{"name", name_},
          {"potential", {base_[0].to_json(), base_[1].to_json(), base_[2].to_json()}},
          {"gauge_terms", g},
          {"field", {b_[0].to_json(), b_[1].to_json(), b_[2].to_json()}}};
}

MagneticField constant_field(const Eigen::Vector3d& b) {
  const VectorPolynomial bp{Polynomial3::constant(b.x()), Polynomial3::constant(b.y()), Polynomial3::constant(b.z())};
  return MagneticField::from_field("constant", bp);
}

MagneticField flat_quadratic_field(double theta0, double a, double b, double k) {
  const double c = std::cos(theta0), s = std::sin(theta0);
  if (!(s > 1e-3)) throw ConfigError("flat_quadratic_field: theta0 must be bounded away from 0");
  using P = Polynomial3;
  const P x = P::variable(0), y = P::variable(1), z = P::variable(2);
  const P w = s * y - c * z;
  const P g = P::constant(1.0) + a * x.pow(2) + (b / (s * s)) * w.pow(2);
  const P integral = x + (a / 3.0) * x.pow(3) + (b / (s * s)) * (w.pow(2) * x);
  const P depth = P::constant(1.0) + k * z.pow(2);
  const VectorPolynomial field{(-2.0 * k * s) * (z * integral), c * (depth * g), s * (depth * g)};
  return MagneticField::from_field("flat-quadratic", field);
}

Polynomial3 linear_gauge(double cx, double cy) {
  return Polynomial3::monomial(cx, 1, 0, 0) + Polynomial3::monomial(cy, 0, 1, 0);
}

Polynomial3 quadratic_gauge(double cxx, double cxy, double cyy) {
  return Polynomial3::monomial(cxx, 2, 0, 0) + Polynomial3::monomial(cxy, 1, 1, 0) +
         Polynomial3::monomial(cyy, 0, 2, 0);
}

}  // namespace magspec::geometry
