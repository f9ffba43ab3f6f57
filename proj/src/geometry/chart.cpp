#include "magspec/geometry/chart.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <Eigen/Dense>

namespace magspec::geometry {

using Eigen::Matrix2d;
using Eigen::Vector2d;
using Eigen::Vector3d;

nlohmann::json BoundaryChart::to_json() const {
  return {{"name", name()}, {"p_min", {p_min_.x(), p_min_.y()}}, {"p_max", {p_max_.x(), p_max_.y()}}};
}

bool BoundaryChart::contains(const Vector2d& p) const {
  return p.x() >= p_min_.x() && p.x() <= p_max_.x() && p.y() >= p_min_.y() && p.y() <= p_max_.y();
}

Vector3d BoundaryChart::normal(const Vector2d& p) const {
  const SurfacePoint sp = evaluate(p);
  Vector3d n = sp.d1.cross(sp.d2);
  const double len = n.norm();
  const double scale = std::max(sp.d1.norm(), sp.d2.norm());
  if (!(len > 1e-12 * scale * scale))
    throw GeometryError(name() + ": degenerate immersion at p = (" + std::to_string(p.x()) + ", " +
                        std::to_string(p.y()) + ")");
  n /= len;
  if (n.dot(level_gradient(sp.x)) < 0) n = -n;
  return n;
}

Matrix2d BoundaryChart::first_form(const Vector2d& p) const {
  const SurfacePoint sp = evaluate(p);
  Matrix2d g;
  g << sp.d1.dot(sp.d1), sp.d1.dot(sp.d2), sp.d1.dot(sp.d2), sp.d2.dot(sp.d2);
  return g;
}

Matrix2d BoundaryChart::second_form(const Vector2d& p) const {
  const SurfacePoint sp = evaluate(p);
  const Vector3d n = normal(p);
  const double off = -n.dot(sp.d12);
  Matrix2d k;
  k << -n.dot(sp.d11), off, off, -n.dot(sp.d22);
  return k;
}

Vector3d BoundaryChart::shape_operator(const Vector2d& p, const Vector3d& u) const {
  const SurfacePoint sp = evaluate(p);
  Eigen::Matrix<double, 3, 2> j;
  j << sp.d1, sp.d2;
  const Matrix2d g = j.transpose() * j;
  const Vector2d q = g.ldlt().solve(j.transpose() * u);
  return j * g.ldlt().solve(second_form(p) * q);
}

Vector2d BoundaryChart::project(const Vector3d& y, Vector2d p) const {
  for (int it = 0; it < 3; ++it) {
    const SurfacePoint sp = evaluate(p);
    Eigen::Matrix<double, 3, 2> j;
    j << sp.d1, sp.d2;
    p -= (j.transpose() * j).ldlt().solve(j.transpose() * (sp.x - y));
  }
  return p;
}

double BoundaryChart::surface_residual(const Vector3d& x) const {
  return std::abs(level(x)) / level_gradient(x).norm();
}

PlaneChart::PlaneChart(double rotation, double half_extent)
    : BoundaryChart({-half_extent, -half_extent}, {half_extent, half_extent}),
      c_(std::cos(rotation)),
      s_(std::sin(rotation)),
      rotation_(rotation) {}

SurfacePoint PlaneChart::evaluate(const Vector2d& p) const {
  SurfacePoint sp;
  sp.x = {c_ * p.x() - s_ * p.y(), s_ * p.x() + c_ * p.y(), 0.0};
  sp.d1 = {c_, s_, 0.0};
  sp.d2 = {-s_, c_, 0.0};
  sp.d11 = sp.d12 = sp.d22 = Vector3d::Zero();
  return sp;
}

nlohmann::json PlaneChart::to_json() const {
  auto j = BoundaryChart::to_json();
  j["rotation"] = rotation_;
  return j;
}

EllipsoidChart::EllipsoidChart(Vector3d axes, int polar_axis, double max_latitude)
    : BoundaryChart({-std::numbers::pi, -max_latitude}, {std::numbers::pi, max_latitude}), axes_(axes), k_(polar_axis) {
  if (k_ < 0 || k_ > 2) throw ConfigError("EllipsoidChart: polar axis must be 0, 1 or 2");
  if (!(axes.minCoeff() > 0)) throw ConfigError("EllipsoidChart: semi-axes must be positive");
  if (!(max_latitude > 0 && max_latitude < std::numbers::pi / 2)) throw ConfigError("EllipsoidChart: max latitude in (0, pi/2)");
}

std::string EllipsoidChart::name() const {
  const bool sphere = axes_.x() == 1.0 && axes_.y() == 1.0 && axes_.z() == 1.0;
  return sphere ? "sphere" : "ellipsoid";
}

SurfacePoint EllipsoidChart::evaluate(const Vector2d& p) const {
  const int i = (k_ + 1) % 3, j = (k_ + 2) % 3;
  const double cu = std::cos(p.x()), su = std::sin(p.x()), cv = std::cos(p.y()), sv = std::sin(p.y());
  const double a = axes_[i], b = axes_[j], c = axes_[k_];
  SurfacePoint sp;
  auto put = [&](Vector3d& v, double xi, double xj, double xk) {
    v[i] = xi;
    v[j] = xj;
    v[k_] = xk;
  };
  put(sp.x, a * cv * cu, b * cv * su, c * sv);
  put(sp.d1, -a * cv * su, b * cv * cu, 0.0);
  put(sp.d2, -a * sv * cu, -b * sv * su, c * cv);
  put(sp.d11, -a * cv * cu, -b * cv * su, 0.0);
  put(sp.d12, a * sv * su, -b * sv * cu, 0.0);
  put(sp.d22, -a * cv * cu, -b * cv * su, -c * sv);
  return sp;
}

double EllipsoidChart::level(const Vector3d& x) const { return x.cwiseQuotient(axes_).squaredNorm() - 1.0; }

Vector3d EllipsoidChart::level_gradient(const Vector3d& x) const {
  return 2.0 * x.cwiseQuotient(axes_.cwiseProduct(axes_));
}

Vector2d EllipsoidChart::coordinates_of(const Vector3d& x) const {
  const int i = (k_ + 1) % 3, j = (k_ + 2) % 3;
  const double v = std::asin(std::clamp(x[k_] / axes_[k_], -1.0, 1.0));
  return {std::atan2(x[j] / axes_[j], x[i] / axes_[i]), v};
}

nlohmann::json EllipsoidChart::to_json() const {
  auto j = BoundaryChart::to_json();
  j["axes"] = {axes_.x(), axes_.y(), axes_.z()};
  j["polar_axis"] = k_;
  return j;
}

std::shared_ptr<EllipsoidChart> sphere_chart(int polar_axis) {
  return std::make_shared<EllipsoidChart>(Vector3d(1, 1, 1), polar_axis);
}

GraphChart::GraphChart(Polynomial3 f, double half_extent)
    : BoundaryChart({-half_extent, -half_extent}, {half_extent, half_extent}), f_(std::move(f)) {
  for (const auto& [e, c] : f_.terms())
    if (e[2] != 0) throw ConfigError("GraphChart: f must not depend on z");
  fx_ = f_.derivative(0);
  fy_ = f_.derivative(1);
  fxx_ = fx_.derivative(0);
  fxy_ = fx_.derivative(1);
  fyy_ = fy_.derivative(1);
}

SurfacePoint GraphChart::evaluate(const Vector2d& p) const {
  const double x = p.x(), y = p.y();
  SurfacePoint sp;
  sp.x = {x, y, f_.evaluate(x, y, 0)};
  sp.d1 = {1, 0, fx_.evaluate(x, y, 0)};
  sp.d2 = {0, 1, fy_.evaluate(x, y, 0)};
  sp.d11 = {0, 0, fxx_.evaluate(x, y, 0)};
  sp.d12 = {0, 0, fxy_.evaluate(x, y, 0)};
  sp.d22 = {0, 0, fyy_.evaluate(x, y, 0)};
  return sp;
}

double GraphChart::level(const Vector3d& x) const { return x.z() - f_.evaluate(x.x(), x.y(), 0); }

Vector3d GraphChart::level_gradient(const Vector3d& x) const {
  return {-fx_.evaluate(x.x(), x.y(), 0), -fy_.evaluate(x.x(), x.y(), 0), 1.0};
}

nlohmann::json GraphChart::to_json() const {
  auto j = BoundaryChart::to_json();
  j["f"] = f_.to_json();
  return j;
}

Matrix2d weingarten(const BoundaryChart& chart, const Vector2d& p) {
  const SurfacePoint sp = chart.evaluate(p);
  const Vector3d n = chart.normal(p);
  const Vector3d e1 = sp.d1.normalized();
  const Vector3d e2 = n.cross(e1);
  const Vector3d w1 = chart.shape_operator(p, e1), w2 = chart.shape_operator(p, e2);
  Matrix2d k;
  k << w1.dot(e1), w1.dot(e2), w2.dot(e1), w2.dot(e2);
  return k;
}

}  // namespace magspec::geometry
