#include "magspec/geometry/polynomial.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace magspec::geometry {

namespace {

double ipow(double x, int n) {
  double r = 1.0;
  for (int k = 0; k < n; ++k) r *= x;
  return r;
}

}  // namespace

Polynomial3::Polynomial3(Terms terms) {
  for (const auto& [e, c] : terms) add_term(e, c);
}

Polynomial3 Polynomial3::constant(double c) { return monomial(c, 0, 0, 0); }

Polynomial3 Polynomial3::monomial(double c, int i, int j, int k) {
  if (i < 0 || j < 0 || k < 0) throw std::invalid_argument("Polynomial3: negative exponent");
  Polynomial3 p;
  p.add_term({i, j, k}, c);
  return p;
}

Polynomial3 Polynomial3::variable(int axis) {
  Exponent e{0, 0, 0};
  e.at(axis) = 1;
  return monomial(1.0, e[0], e[1], e[2]);
}

void Polynomial3::add_term(const Exponent& e, double c) {
  if (c == 0.0) return;
  auto [it, inserted] = terms_.emplace(e, c);
  if (!inserted) {
    it->second += c;
    if (it->second == 0.0) terms_.erase(it);
  }
}

double Polynomial3::evaluate(double x, double y, double z) const {
  double sum = 0.0;
  for (const auto& [e, c] : terms_) sum += c * ipow(x, e[0]) * ipow(y, e[1]) * ipow(z, e[2]);
  return sum;
}

Polynomial3 Polynomial3::derivative(int axis) const {
  Polynomial3 out;
  for (const auto& [e, c] : terms_) {
    if (e.at(axis) == 0) continue;
    Exponent d = e;
    d[axis] -= 1;
    out.add_term(d, c * e[axis]);
  }
  return out;
}

Polynomial3 Polynomial3::mixed_partial(int a, int b) const {
  Polynomial3 out;
  for (const auto& [e, c] : terms_) {
    Exponent d = e;
    long factor = d.at(a);
    d[a] -= 1;
    factor *= d.at(b);
    d[b] -= 1;
    if (factor == 0) continue;
    out.add_term(d, c * static_cast<double>(factor));
  }
  return out;
}

Polynomial3 Polynomial3::antiderivative(int axis) const {
  Polynomial3 out;
  for (const auto& [e, c] : terms_) {
    Exponent d = e;
    d.at(axis) += 1;
    out.add_term(d, c / d[axis]);
  }
  return out;
}

Polynomial3 Polynomial3::restrict(int axis, double value) const {
  Polynomial3 out;
  for (const auto& [e, c] : terms_) {
    Exponent d = e;
    d.at(axis) = 0;
    out.add_term(d, c * ipow(value, e[axis]));
  }
  return out;
}

Polynomial3& Polynomial3::operator+=(const Polynomial3& o) {
  for (const auto& [e, c] : o.terms_) add_term(e, c);
  return *this;
}

Polynomial3& Polynomial3::operator-=(const Polynomial3& o) {
  for (const auto& [e, c] : o.terms_) add_term(e, -c);
  return *this;
}

Polynomial3 operator*(const Polynomial3& a, const Polynomial3& b) {
  Polynomial3 out;
  for (const auto& [ea, ca] : a.terms_)
    for (const auto& [eb, cb] : b.terms_) out.add_term({ea[0] + eb[0], ea[1] + eb[1], ea[2] + eb[2]}, ca * cb);
  return out;
}

Polynomial3 operator*(double c, const Polynomial3& a) {
  Polynomial3 out;
  for (const auto& [e, v] : a.terms_) out.add_term(e, c * v);
  return out;
}

Polynomial3 Polynomial3::pow(int n) const {
  if (n < 0) throw std::invalid_argument("Polynomial3::pow: negative power");
  Polynomial3 r = constant(1.0);
  for (int k = 0; k < n; ++k) r = r * *this;
  return r;
}

int Polynomial3::degree() const {
  int d = -1;
  for (const auto& [e, c] : terms_) d = std::max(d, e[0] + e[1] + e[2]);
  return d;
}

double Polynomial3::max_abs_coefficient() const {
  double m = 0.0;
  for (const auto& [e, c] : terms_) m = std::max(m, std::abs(c));
  return m;
}

std::string Polynomial3::to_string() const {
  if (terms_.empty()) return "0";
  std::ostringstream os;
  os.precision(17);
  bool first = true;
  static const char* names[3] = {"x", "y", "z"};
  for (const auto& [e, c] : terms_) {
    os << (first ? "" : " + ") << c;
    for (int a = 0; a < 3; ++a) {
      if (e[a] == 0) continue;
      os << '*' << names[a];
      if (e[a] > 1) os << '^' << e[a];
    }
    first = false;
  }
  return os.str();
}

nlohmann::json Polynomial3::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& [e, c] : terms_) arr.push_back({{"exponent", e}, {"coefficient", c}});
  return arr;
}

Polynomial3 Polynomial3::from_json(const nlohmann::json& j) {
  Polynomial3 p;
  for (const auto& t : j) p.add_term(t.at("exponent").get<Exponent>(), t.at("coefficient").get<double>());
  return p;
}

VectorPolynomial curl(const VectorPolynomial& a) {
  return {a[2].derivative(1) - a[1].derivative(2), a[0].derivative(2) - a[2].derivative(0),
          a[1].derivative(0) - a[0].derivative(1)};
}

Polynomial3 divergence(const VectorPolynomial& b) {
  return b[0].derivative(0) + b[1].derivative(1) + b[2].derivative(2);
}

VectorPolynomial gradient(const Polynomial3& phi) {
  return {phi.derivative(0), phi.derivative(1), phi.derivative(2)};
}

VectorPolynomial curl_of_gradient(const Polynomial3& phi) {
  return {phi.mixed_partial(2, 1) - phi.mixed_partial(1, 2), phi.mixed_partial(0, 2) - phi.mixed_partial(2, 0),
          phi.mixed_partial(1, 0) - phi.mixed_partial(0, 1)};
}

}  // namespace magspec::geometry
