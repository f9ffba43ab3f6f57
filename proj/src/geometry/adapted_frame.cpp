#include "magspec/geometry/adapted_frame.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <ostream>
#include <Eigen/Dense>

#include "magspec/log.hpp"
#include "magspec/parallel.hpp"

namespace magspec::geometry {

using Eigen::Vector2d;
using Eigen::Vector3d;

namespace {

constexpr double kShadowOffset = 1e-4;

struct SurfaceState {
  Vector2d p;
  Vector3d x;
};

struct GeodesicState {
  Vector2d p;
  Vector3d x, v;
};

std::optional<SurfaceState> onto(const BoundaryChart& c, const Vector3d& y, const Vector2d& guess) {
  const Vector2d p = c.project(y, guess);
  if (!c.contains(p)) return std::nullopt;
  return SurfaceState{p, c.evaluate(p).x};
}

std::optional<SurfaceState> field_step(const BoundaryChart& c, const MagneticField& f, const SurfaceState& st,
                                       double h) {
  const Vector3d k1 = tangent_direction(c, f, st.p);
  const auto s2 = onto(c, st.x + 0.5 * h * k1, st.p);
  if (!s2) return std::nullopt;
  const Vector3d k2 = tangent_direction(c, f, s2->p);
  const auto s3 = onto(c, st.x + 0.5 * h * k2, s2->p);
  if (!s3) return std::nullopt;
  const Vector3d k3 = tangent_direction(c, f, s3->p);
  const auto s4 = onto(c, st.x + h * k3, s3->p);
  if (!s4) return std::nullopt;
  const Vector3d k4 = tangent_direction(c, f, s4->p);
  return onto(c, st.x + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4), s4->p);
}

// Acceleration -K(v, v) n of a geodesic through the projection of y.
Vector3d geodesic_acceleration(const BoundaryChart& c, const Vector3d& y, const Vector3d& v, Vector2d& guess) {
  guess = c.project(y, guess);
  const Vector3d n = c.normal(guess);
  return -c.shape_operator(guess, v).dot(v) * n;
}

std::optional<GeodesicState> geodesic_step(const BoundaryChart& c, const GeodesicState& st, double h) {
  Vector2d g = st.p;
  const Vector3d a1 = geodesic_acceleration(c, st.x, st.v, g);
  const Vector3d x2 = st.x + 0.5 * h * st.v, v2 = st.v + 0.5 * h * a1;
  const Vector3d a2 = geodesic_acceleration(c, x2, v2, g);
  const Vector3d x3 = st.x + 0.5 * h * v2, v3 = st.v + 0.5 * h * a2;
  const Vector3d a3 = geodesic_acceleration(c, x3, v3, g);
  const Vector3d x4 = st.x + h * v3, v4 = st.v + h * a3;
  const Vector3d a4 = geodesic_acceleration(c, x4, v4, g);
  const Vector3d x = st.x + (h / 6.0) * (st.v + 2 * v2 + 2 * v3 + v4);
  Vector3d v = st.v + (h / 6.0) * (a1 + 2 * a2 + 2 * a3 + a4);
  const auto s = onto(c, x, g);
  if (!s) return std::nullopt;
  const Vector3d n = c.normal(s->p);
  v -= v.dot(n) * n;
  return GeodesicState{s->p, s->x, v};
}

// States at k = 0..n steps of size h (each split into substeps); stops early
// when the chart is left.
std::vector<GeodesicState> shoot(const BoundaryChart& c, GeodesicState st, std::size_t n, double h, int substeps) {
  std::vector<GeodesicState> out{st};
  for (std::size_t k = 0; k < n; ++k) {
    for (int m = 0; m < substeps; ++m) {
      auto next = geodesic_step(c, st, h / substeps);
      if (!next) return out;
      st = *next;
    }
    out.push_back(st);
  }
  return out;
}

GeodesicState launch(const BoundaryChart& c, const MagneticField& f, const SurfaceState& s) {
  const Vector3d tangent = tangent_direction(c, f, s.p);
  return {s.p, s.x, tangent.cross(c.normal(s.p))};
}

// Cumulative integrals from sample 0 to sample k, fourth order.
std::vector<double> cumulative_simpson(const std::vector<double>& f, double h) {
  const std::size_t n = f.size();
  std::vector<double> out(n, 0.0);
  for (std::size_t k = 1; k < n; ++k) {
    if (k == 1) {
      out[1] = n > 2 ? h * (5 * f[0] + 8 * f[1] - f[2]) / 12.0 : 0.5 * h * (f[0] + f[1]);
      continue;
    }
    const std::size_t even = (k % 2 == 0) ? k : k - 3;
    double sum = 0.0;
    for (std::size_t m = 0; m + 2 <= even; m += 2) sum += h / 3.0 * (f[m] + 4 * f[m + 1] + f[m + 2]);
    if (even != k) sum += 3.0 * h / 8.0 * (f[k - 3] + 3 * f[k - 2] + 3 * f[k - 1] + f[k]);
    out[k] = sum;
  }
  return out;
}

}  // namespace

Vector3d tangent_direction(const BoundaryChart& chart, const MagneticField& field, const Vector2d& p) {
  const Vector3d x = chart.evaluate(p).x;
  const Vector3d n = chart.normal(p);
  const Vector3d b = field.field(x);
  const Vector3d par = b - b.dot(n) * n;
  const double len = par.norm();
  if (!(len > 1e-6))
    throw AssumptionError("magnetic field tangent-projection degenerate at x = (" + std::to_string(x.x()) + ", " +
                          std::to_string(x.y()) + ", " + std::to_string(x.z()) + ")");
  return par / len;
}

FieldLine field_line(ChartPtr chart, const MagneticField& field, const Vector2d& p0, double s_min, double s_max,
                     double step, int substeps) {
  if (!chart) throw std::invalid_argument("field_line: null chart");
  if (!(step > 0) || substeps < 1) throw std::invalid_argument("field_line: step must be positive");
  if (!(s_min <= 0 && s_max >= 0)) throw std::invalid_argument("field_line: s span must contain 0");
  if (!chart->contains(p0)) throw GeometryError("field_line: start point outside the chart domain");
  const BoundaryChart& c = *chart;
  FieldLine line;
  line.chart = chart;
  line.field = field;
  line.step = step;
  line.substeps = substeps;

  auto march = [&](long count, double h) {
    std::vector<SurfaceState> out;
    SurfaceState st{p0, c.evaluate(p0).x};
    for (long k = 0; k < count; ++k) {
      for (int m = 0; m < substeps; ++m) {
        auto next = field_step(c, field, st, h / substeps);
        if (!next) {
          line.truncated = true;
          return out;
        }
        st = *next;
      }
      out.push_back(st);
    }
    return out;
  };
  const auto fwd = march(std::lround(s_max / step), step);
  const auto bwd = march(std::lround(-s_min / step), -step);
  if (line.truncated) warn("field line left the chart domain; s range truncated");

  auto sample = [&](const SurfaceState& st, long k) {
    CurveSample cs;
    cs.s = k * step;
    cs.p = st.p;
    cs.x = st.x;
    cs.tangent = tangent_direction(c, field, st.p);
    cs.normal = c.normal(st.p);
    line.max_surface_residual = std::max(line.max_surface_residual, c.surface_residual(st.x));
    return cs;
  };
  for (long k = static_cast<long>(bwd.size()); k >= 1; --k) line.samples.push_back(sample(bwd[k - 1], -k));
  line.origin = line.samples.size();
  line.samples.push_back(sample({p0, c.evaluate(p0).x}, 0));
  for (std::size_t k = 0; k < fwd.size(); ++k) line.samples.push_back(sample(fwd[k], static_cast<long>(k) + 1));
  return line;
}

AdaptedFrame geodesic_family(const FieldLine& gamma, double r_half, double step) {
  if (!gamma.chart || gamma.samples.empty()) throw std::invalid_argument("geodesic_family: empty field line");
  if (!(step > 0) || !(r_half >= 0)) throw std::invalid_argument("geodesic_family: bad r span");
  const BoundaryChart& c = *gamma.chart;
  const MagneticField& field = gamma.field;
  const std::size_t ns = gamma.samples.size();
  const std::size_t n_half = static_cast<std::size_t>(std::lround(r_half / step));
  const int sub = gamma.substeps;

  struct Column {
    std::vector<GeodesicState> plus[3], minus[3];  // base, s + delta, s - delta
  };
  std::vector<Column> cols(ns);
  parallel_for(
      ns,
      [&](std::size_t begin, std::size_t end) {
        for (std::size_t j = begin; j < end; ++j) {
          const CurveSample& cs = gamma.samples[j];
          const SurfaceState base{cs.p, cs.x};
          const auto ahead = field_step(c, field, base, kShadowOffset);
          const auto behind = field_step(c, field, base, -kShadowOffset);
          if (!ahead || !behind) throw GeometryError("geodesic_family: field line sample at the chart edge");
          const SurfaceState starts[3] = {base, *ahead, *behind};
          for (int m = 0; m < 3; ++m) {
            const GeodesicState g0 = launch(c, field, starts[m]);
            cols[j].plus[m] = shoot(c, g0, n_half, step, sub);
            cols[j].minus[m] = shoot(c, g0, n_half, -step, sub);
          }
        }
      },
      1);

  std::size_t keep_plus = n_half, keep_minus = n_half;
  for (const auto& col : cols)
    for (int m = 0; m < 3; ++m) {
      keep_plus = std::min(keep_plus, col.plus[m].size() - 1);
      keep_minus = std::min(keep_minus, col.minus[m].size() - 1);
    }
  if (keep_plus < n_half || keep_minus < n_half)
    warn("geodesic family left the chart domain; r range truncated to [" + std::to_string(-double(keep_minus) * step) +
         ", " + std::to_string(double(keep_plus) * step) + "]");

  AdaptedFrame f;
  f.chart = gamma.chart;
  f.field = field;
  f.origin = gamma.samples[gamma.origin].p;
  f.substeps = sub;
  for (long k = -static_cast<long>(keep_minus); k <= static_cast<long>(keep_plus); ++k) f.r_grid.push_back(k * step);
  for (const auto& cs : gamma.samples) f.s_grid.push_back(cs.s);
  f.r_origin = keep_minus;
  f.s_origin = gamma.origin;
  const std::size_t nr = f.r_grid.size(), total = nr * ns;
  f.chart_point.resize(total);
  f.gamma.resize(total);
  f.d_r.resize(total);
  f.d_s.resize(total);
  f.normal.resize(total);
  f.dn_r.resize(total);
  f.dn_s.resize(total);
  f.alpha.resize(total);
  for (std::size_t i = 0; i < nr; ++i) {
    const long k = static_cast<long>(i) - static_cast<long>(keep_minus);
    for (std::size_t j = 0; j < ns; ++j) {
      auto pick = [&](int m) -> const GeodesicState& {
        return k >= 0 ? cols[j].plus[m][static_cast<std::size_t>(k)] : cols[j].minus[m][static_cast<std::size_t>(-k)];
      };
      const GeodesicState& g = pick(0);
      const std::size_t id = f.index(i, j);
      f.chart_point[id] = g.p;
      f.gamma[id] = g.x;
      f.d_r[id] = g.v;
      f.d_s[id] = (pick(1).x - pick(2).x) / (2 * kShadowOffset);
      f.normal[id] = c.normal(g.p);
      f.dn_r[id] = c.shape_operator(g.p, f.d_r[id]);
      f.dn_s[id] = c.shape_operator(g.p, f.d_s[id]);
      f.alpha[id] = f.d_s[id].squaredNorm();
      f.max_surface_residual = std::max(f.max_surface_residual, c.surface_residual(g.x));
    }
  }
  return f;
}

AdaptedFrame frame_fields(AdaptedFrame f, std::shared_ptr<const model::BandCurve> band) {
  if (!band) throw std::invalid_argument("frame_fields: a band curve is required");
  const std::size_t total = f.gamma.size();
  f.band = std::move(band);
  f.B1.resize(total);
  f.B2.resize(total);
  f.B3.resize(total);
  f.theta.resize(total);
  f.beta.resize(total);
  f.norm_b.resize(total);
  for (std::size_t id = 0; id < total; ++id) {
    const Vector3d b = f.field.field(f.gamma[id]);
    const double nb = b.norm();
    f.B1[id] = b.dot(f.d_r[id]);
    f.B2[id] = b.dot(f.d_s[id]) / f.alpha[id];
    f.B3[id] = -b.dot(f.normal[id]);
    f.norm_b[id] = nb;
    const double th = std::asin(std::clamp(b.dot(f.normal[id]) / nb, -1.0, 1.0));
    if (!(th > 0.0 && th < std::numbers::pi / 2))
      throw AssumptionError("field inclination theta = " + std::to_string(th) +
                            " outside (0, pi/2) on the patch (interior inclination hypothesis violated)");
    f.theta[id] = th;
    f.beta[id] = nb * (*f.band)(th);
  }
  return f;
}

std::vector<double> F_integral(AdaptedFrame& f) {
  const std::size_t nr = f.nr(), ns = f.ns();
  f.F.assign(nr * ns, 0.0);
  const double dr = f.dr();
  for (std::size_t j = 0; j < ns; ++j) {
    std::vector<double> up, down;
    for (std::size_t i = f.r_origin; i < nr; ++i) {
      const std::size_t id = f.index(i, j);
      up.push_back(tubular_point(f, id, 0.0).sqrt_det_g * -f.field.field(f.gamma[id]).dot(f.normal[id]));
    }
    for (std::size_t m = 0; m <= f.r_origin; ++m) {
      const std::size_t id = f.index(f.r_origin - m, j);
      down.push_back(tubular_point(f, id, 0.0).sqrt_det_g * -f.field.field(f.gamma[id]).dot(f.normal[id]));
    }
    const auto cu = cumulative_simpson(up, dr), cd = cumulative_simpson(down, dr);
    for (std::size_t m = 0; m < cu.size(); ++m) f.F[f.index(f.r_origin + m, j)] = cu[m];
    for (std::size_t m = 1; m < cd.size(); ++m) f.F[f.index(f.r_origin - m, j)] = -cd[m];
  }
  return f.F;
}

AdaptedFrame build_frame(const FrameSpec& spec, std::shared_ptr<const model::BandCurve> band) {
  const FieldLine line =
      field_line(spec.chart, spec.field, spec.origin, -spec.s_half, spec.s_half, spec.step, spec.substeps);
  AdaptedFrame f = geodesic_family(line, spec.r_half, spec.step);
  if (band) f = frame_fields(std::move(f), std::move(band));
  F_integral(f);
  return f;
}

TubularPoint tubular_point(const AdaptedFrame& f, std::size_t id, double t) {
  TubularPoint tp;
  tp.position = f.gamma[id] - t * f.normal[id];
  tp.jacobian.col(0) = f.d_r[id] - t * f.dn_r[id];
  tp.jacobian.col(1) = f.d_s[id] - t * f.dn_s[id];
  tp.jacobian.col(2) = -f.normal[id];
  tp.sqrt_det_g = std::abs(tp.jacobian.determinant());
  tp.frame_field = tp.jacobian.partialPivLu().solve(f.field.field(tp.position));
  return tp;
}

FrameInvariants check_invariants(const AdaptedFrame& f, const std::vector<double>& t_values) {
  FrameInvariants inv;
  inv.min_b2_on_axis = std::numeric_limits<double>::infinity();
  inv.surface_residual = f.max_surface_residual;
  const std::size_t ns = f.ns(), i0 = f.r_origin;
  for (std::size_t id = 0; id < f.gamma.size(); ++id) {
    inv.unit_speed = std::max(inv.unit_speed, std::abs(f.d_r[id].norm() - 1.0));
    inv.orthogonality = std::max(inv.orthogonality, std::abs(f.d_r[id].dot(f.d_s[id])));
    if (f.has_fields()) {
      const double b2 = f.norm_b[id] * f.norm_b[id];
      const double rebuilt = f.B1[id] * f.B1[id] + f.alpha[id] * f.B2[id] * f.B2[id] + f.B3[id] * f.B3[id];
      inv.norm_identity = std::max(inv.norm_identity, std::abs(b2 - rebuilt) / b2);
    }
    for (double t : t_values) {
      const TubularPoint tp = tubular_point(f, id, t);
      const Eigen::Matrix3d g = tp.jacobian.transpose() * tp.jacobian;
      inv.metric_block = std::max({inv.metric_block, std::abs(g(0, 2)), std::abs(g(1, 2)), std::abs(g(2, 2) - 1.0)});
    }
  }
  for (std::size_t j = 0; j < ns; ++j) {
    const std::size_t id = f.index(i0, j);
    inv.alpha_on_axis = std::max(inv.alpha_on_axis, std::abs(f.alpha[id] - 1.0));
    if (j > 0 && j + 1 < ns) {
      const double slope = (f.alpha[f.index(i0, j + 1)] - f.alpha[f.index(i0, j - 1)]) / (2 * f.ds());
      inv.alpha_slope_on_axis = std::max(inv.alpha_slope_on_axis, std::abs(slope));
    }
    Eigen::Matrix3d m;
    m << f.d_r[id], f.d_s[id], f.normal[id];
    if (!(m.determinant() > 0)) inv.direct_basis = false;
    if (f.has_fields()) {
      inv.b1_on_axis = std::max(inv.b1_on_axis, std::abs(f.B1[id]));
      inv.min_b2_on_axis = std::min(inv.min_b2_on_axis, f.B2[id]);
      inv.remark_b2 = std::max(inv.remark_b2, std::abs(f.B2[id] - f.norm_b[id] * std::cos(f.theta[id])));
      inv.remark_b3 = std::max(inv.remark_b3, std::abs(f.B3[id] + f.norm_b[id] * std::sin(f.theta[id])));
    }
  }
  return inv;
}

AdaptedCoordinates::AdaptedCoordinates(ChartPtr chart, MagneticField field, Vector2d origin, double r_half,
                                       double s_half, double step)
    : chart_(std::move(chart)),
      field_(std::move(field)),
      origin_(origin),
      r_half_(r_half),
      s_half_(s_half),
      step_(step),
      n_r_(std::max(1, static_cast<int>(std::ceil(r_half / step - 1e-9)))),
      n_s_(std::max(1, static_cast<int>(std::ceil(s_half / step - 1e-9)))) {
  if (!chart_) throw std::invalid_argument("AdaptedCoordinates: null chart");
  if (!(step > 0)) throw std::invalid_argument("AdaptedCoordinates: step must be positive");
}

FramePoint AdaptedCoordinates::point(double r, double s) const {
  const BoundaryChart& c = *chart_;
  SurfaceState st{origin_, c.evaluate(origin_).x};
  if (s != 0.0)
    for (int k = 0; k < n_s_; ++k) {
      auto next = field_step(c, field_, st, s / n_s_);
      if (!next) throw GeometryError("adapted coordinates: field line left the chart domain");
      st = *next;
    }
  GeodesicState g = launch(c, field_, st);
  if (r != 0.0)
    for (int k = 0; k < n_r_; ++k) {
      auto next = geodesic_step(c, g, r / n_r_);
      if (!next) throw GeometryError("adapted coordinates: geodesic left the chart domain");
      g = *next;
    }
  return {g.p, g.x, g.v, c.normal(g.p)};
}

void write_frame_csv(const AdaptedFrame& f, std::ostream& os) {
  os << "r,s,x,y,z,alpha,B1,B2,B3,theta,beta,normB,F\n";
  os.precision(12);
  for (std::size_t i = 0; i < f.nr(); ++i)
    for (std::size_t j = 0; j < f.ns(); ++j) {
      const std::size_t id = f.index(i, j);
      auto opt = [&](const std::vector<double>& v) { return v.empty() ? std::nan("") : v[id]; };
      os << f.r_grid[i] << ',' << f.s_grid[j] << ',' << f.gamma[id].x() << ',' << f.gamma[id].y() << ','
         << f.gamma[id].z() << ',' << f.alpha[id] << ',' << opt(f.B1) << ',' << opt(f.B2) << ',' << opt(f.B3) << ','
         << opt(f.theta) << ',' << opt(f.beta) << ',' << opt(f.norm_b) << ',' << opt(f.F) << '\n';
    }
}

}  // namespace magspec::geometry
