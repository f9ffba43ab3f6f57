#include "magspec/beta/beta_minimum.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <Eigen/Dense>

#include "magspec/error.hpp"
#include "magspec/log.hpp"
#include "magspec/parallel.hpp"

namespace magspec::beta {

using Eigen::Matrix2d;
using Eigen::Vector2d;

namespace {

template <std::size_t K>
using Values = std::array<double, K>;

template <std::size_t K>
struct Stencil {
  Values<K> value{};
  std::array<Vector2d, K> gradient{};
  std::array<Matrix2d, K> hessian{};
};

// Central differences of every output of f at step h.
template <std::size_t K, class F>
Stencil<K> central(const F& f, const Vector2d& p, const Values<K>& f0, double h) {
  const double r = p.x(), s = p.y();
  const Values<K> fpr = f(r + h, s), fmr = f(r - h, s), fps = f(r, s + h), fms = f(r, s - h);
  const Values<K> fpp = f(r + h, s + h), fpm = f(r + h, s - h), fmp = f(r - h, s + h), fmm = f(r - h, s - h);
  Stencil<K> out;
  out.value = f0;
  for (std::size_t k = 0; k < K; ++k) {
    out.gradient[k] = Vector2d((fpr[k] - fmr[k]) / (2 * h), (fps[k] - fms[k]) / (2 * h));
    const double hrr = (fpr[k] - 2 * f0[k] + fmr[k]) / (h * h);
    const double hss = (fps[k] - 2 * f0[k] + fms[k]) / (h * h);
    const double hrs = (fpp[k] - fpm[k] - fmp[k] + fmm[k]) / (4 * h * h);
    out.hessian[k] << hrr, hrs, hrs, hss;
  }
  return out;
}

template <std::size_t K, class F>
Stencil<K> richardson(const F& f, const Vector2d& p, double h) {
  const Values<K> f0 = f(p.x(), p.y());
  const Stencil<K> coarse = central<K>(f, p, f0, h);
  const Stencil<K> fine = central<K>(f, p, f0, 0.5 * h);
  Stencil<K> out;
  out.value = f0;
  for (std::size_t k = 0; k < K; ++k) {
    out.gradient[k] = (4 * fine.gradient[k] - coarse.gradient[k]) / 3;
    out.hessian[k] = (4 * fine.hessian[k] - coarse.hessian[k]) / 3;
  }
  return out;
}

bool spd(const Matrix2d& h, double floor = 1e-10) {
  Eigen::SelfAdjointEigenSolver<Matrix2d> es(h);
  return es.eigenvalues().minCoeff() > floor;
}

struct NewtonRun {
  Vector2d rs = Vector2d::Zero();
  Derivatives d;
  std::size_t iterations = 0;
  bool converged = false;
};

NewtonRun newton(const BetaLandscape& land, Vector2d x, double h, const Vector2d& lo, const Vector2d& hi,
                 std::size_t max_iterations) {
  NewtonRun run;
  auto clamp = [&](Vector2d y) {
    return Vector2d(std::clamp(y.x(), lo.x(), hi.x()), std::clamp(y.y(), lo.y(), hi.y()));
  };
  Derivatives d = land.derivatives(x, h);
  for (std::size_t it = 0; it <= max_iterations; ++it) {
    run.iterations = it;
    if (d.gradient.norm() < 1e-8 * std::abs(d.value)) {
      run.converged = true;
      break;
    }
    if (it == max_iterations) break;

    // Modified Newton: shift the Hessian until it is positive definite.
    Eigen::SelfAdjointEigenSolver<Matrix2d> es(d.hessian);
    const double lmin = es.eigenvalues().minCoeff();
    const double scale = std::max(es.eigenvalues().cwiseAbs().maxCoeff(), 1e-12);
    Matrix2d m = d.hessian;
    if (lmin <= 1e-6 * scale) m += (1e-6 * scale - lmin) * Matrix2d::Identity();
    Vector2d dx = -m.ldlt().solve(d.gradient);
    const double cap = 4 * h;
    if (dx.norm() > cap) dx *= cap / dx.norm();

    // Backtracking on beta; tiny steps are taken as they come since beta
    // differences there are below rounding.
    double t = 1.0;
    Vector2d y = clamp(x + dx);
    if (dx.norm() > 1e-6 * h) {
      const double slope = d.gradient.dot(dx);
      while (t > 1e-4) {
        y = clamp(x + t * dx);
        if (land.at(y.x(), y.y()).beta <= d.value + 1e-4 * t * slope + 1e-15 * std::abs(d.value)) break;
        t *= 0.5;
      }
    }
    x = y;
    d = land.derivatives(x, h);
  }
  run.rs = x;
  run.d = d;
  return run;
}

bool inside(const Vector2d& rs, const Vector2d& lo, const Vector2d& hi) {
  return rs.x() >= lo.x() && rs.x() <= hi.x() && rs.y() >= lo.y() && rs.y() <= hi.y();
}

std::string fmt_point(const Vector2d& p) {
  std::ostringstream os;
  os.precision(6);
  os << "(" << p.x() << ", " << p.y() << ")";
  return os.str();
}

nlohmann::json matrix_json(const Matrix2d& m) {
  return nlohmann::json::array({{m(0, 0), m(0, 1)}, {m(1, 0), m(1, 1)}});
}

}  // namespace

Derivatives richardson_derivatives(const std::function<double(double, double)>& f, const Vector2d& p, double h) {
  if (!(h > 0)) throw std::invalid_argument("richardson_derivatives: step must be positive");
  auto g = [&](double r, double s) { return Values<1>{f(r, s)}; };
  const Stencil<1> st = richardson<1>(g, p, h);
  return {st.value[0], st.gradient[0], st.hessian[0]};
}

BetaLandscape::BetaLandscape(geometry::AdaptedCoordinates coords, std::shared_ptr<const model::BandCurve> band)
    : coords_(std::move(coords)), band_(std::move(band)) {
  if (!band_) throw std::invalid_argument("BetaLandscape: a band curve is required");
}

BetaLandscape::Sample BetaLandscape::at(double r, double s) const {
  const geometry::FramePoint fp = coords_.point(r, s);
  const Eigen::Vector3d b = coords_.field().field(fp.x);
  Sample out;
  out.norm_b = b.norm();
  out.theta = std::asin(std::clamp(b.dot(fp.normal) / out.norm_b, -1.0, 1.0));
  out.beta = out.norm_b * band_->evaluate(out.theta);
  return out;
}

Derivatives BetaLandscape::derivatives(const Vector2d& rs, double h) const {
  auto f = [&](double r, double s) {
    const Sample v = at(r, s);
    return Values<2>{v.norm_b, v.theta};
  };
  const Stencil<2> st = richardson<2>(f, rs, h);
  const double nb = st.value[0], th = st.value[1];
  const Vector2d& gn = st.gradient[0];
  const Vector2d& gt = st.gradient[1];
  const double e = band_->evaluate(th), e1 = band_->derivative(th), e2 = band_->second_derivative(th);

  Derivatives d;
  d.value = nb * e;
  d.gradient = e * gn + nb * e1 * gt;
  d.hessian = e * st.hessian[0] + e1 * (gn * gt.transpose() + gt * gn.transpose()) + nb * e1 * st.hessian[1] +
              nb * e2 * gt * gt.transpose();
  d.hessian = 0.5 * (d.hessian + d.hessian.transpose()).eval();
  return d;
}

nlohmann::json BetaMinimum::to_json() const {
  nlohmann::json j;
  j["p0"] = {p0.x(), p0.y()};
  j["rs0"] = {rs0.x(), rs0.y()};
  j["x0"] = {x0.x(), x0.y(), x0.z()};
  j["beta_min"] = beta_min;
  j["b_min"] = b_min;
  j["b_min_sampled"] = b_min_sampled;
  j["hessian"] = matrix_json(hessian);
  j["theta0"] = theta0;
  j["normB0"] = norm_b0;
  j["d0"] = d0;
  j["gap_coeff"] = gap_coeff;
  j["gradient_norm"] = gradient_norm;
  j["newton_iterations"] = newton_iterations;
  j["recentering_rounds"] = recentering_rounds;
  j["multistart"] = {{"converged", starts_converged}, {"spread", uniqueness_spread}};
  j["verdicts"] = {{"localized", verdicts.localized},
                   {"hessian_spd", verdicts.hessian_spd},
                   {"beta_below_b_min", verdicts.beta_below_b_min},
                   {"theta_interior", verdicts.theta_interior},
                   {"unique", verdicts.unique}};
  return j;
}

BetaMinimum minimize_beta(const geometry::AdaptedFrame& frame, const MinimizeOptions& options) {
  if (!frame.has_fields() || !frame.band)
    throw std::invalid_argument("minimize_beta: the frame carries no sampled beta (run frame_fields first)");
  const std::size_t nr = frame.nr(), ns = frame.ns();
  if (nr < 5 || ns < 5) throw std::invalid_argument("minimize_beta: the patch needs at least 5x5 nodes");

  // Best grid sample; it has to sit two cells away from every edge.
  // Ties (a flat valley) go to the node nearest the patch centre.
  auto centre_distance = [&](std::size_t k) {
    const double di = static_cast<double>(k / ns) - 0.5 * static_cast<double>(nr - 1);
    const double dj = static_cast<double>(k % ns) - 0.5 * static_cast<double>(ns - 1);
    return di * di + dj * dj;
  };
  std::size_t best = 0;
  for (std::size_t k = 1; k < frame.beta.size(); ++k) {
    const double tie = 1e-14 * std::abs(frame.beta[best]);
    if (frame.beta[k] < frame.beta[best] - tie ||
        (std::abs(frame.beta[k] - frame.beta[best]) <= tie && centre_distance(k) < centre_distance(best)))
      best = k;
  }
  const std::size_t bi = best / ns, bj = best % ns;
  if (bi < 2 || bj < 2 || bi + 2 >= nr || bj + 2 >= ns) {
    std::ostringstream os;
    os << "minimum not localized in patch: smallest sampled beta = " << frame.beta[best] << " at (r, s) = ("
       << frame.r_grid[bi] << ", " << frame.s_grid[bj] << ")";
    throw AssumptionError(os.str());
  }

  const double h = frame.dr();
  const double sub_step = h / std::max(1, frame.substeps);
  const double r_half = std::max(std::abs(frame.r_grid.front()), std::abs(frame.r_grid.back()));
  const double s_half = std::max(std::abs(frame.s_grid.front()), std::abs(frame.s_grid.back()));
  const BetaLandscape land(geometry::AdaptedCoordinates(frame.chart, frame.field, frame.origin, r_half, s_half,
                                                        sub_step),
                           frame.band);
  // Newton iterates stay one cell inside, the finite-difference stencil needs it.
  const Vector2d lo(frame.r_grid.front() + h, frame.s_grid.front() + frame.ds());
  const Vector2d hi(frame.r_grid.back() - h, frame.s_grid.back() - frame.ds());
  const Vector2d inner_lo(frame.r_grid.front() + 2 * h, frame.s_grid.front() + 2 * frame.ds());
  const Vector2d inner_hi(frame.r_grid.back() - 2 * h, frame.s_grid.back() - 2 * frame.ds());

  const NewtonRun first =
      newton(land, Vector2d(frame.r_grid[bi], frame.s_grid[bj]), h, lo, hi, options.max_newton);
  if (!inside(first.rs, inner_lo, inner_hi))
    throw AssumptionError("minimum not localized in patch: Newton refinement reached " + fmt_point(first.rs));
  if (!spd(first.d.hessian))
    throw AssumptionError("degenerate minimum: Hess beta is not positive definite, so the unique non-degenerate "
                          "minimum hypothesis fails");
  if (!first.converged)
    throw SolverError("minimize_beta: Newton refinement did not converge in " + std::to_string(options.max_newton) +
                      " iterations (|grad beta| = " + std::to_string(first.d.gradient.norm()) + ")");

  BetaMinimum bm;
  bm.rs0 = first.rs;
  bm.newton_iterations = first.iterations;

  // Recentre the coordinates on the minimizer, where they are orthonormal,
  // and take the Hessian at the new origin.
  geometry::FramePoint centre = land.coordinates().point(first.rs.x(), first.rs.y());
  const double local_half = 4 * h;
  Derivatives at0;
  for (std::size_t round = 0;; ++round) {
    const BetaLandscape local(
        geometry::AdaptedCoordinates(frame.chart, frame.field, centre.p, local_half, local_half, sub_step),
        frame.band);
    const Vector2d box(2 * h, 2 * h);
    const NewtonRun run = newton(local, Vector2d::Zero(), h, -box, box, options.max_newton);
    bm.recentering_rounds = round;
    if (run.rs.norm() < 1e-12 || round >= 4) {
      at0 = run.d;
      if (run.rs.norm() >= 1e-12) centre = local.coordinates().point(run.rs.x(), run.rs.y());
      break;
    }
    centre = local.coordinates().point(run.rs.x(), run.rs.y());
  }
  {
    const BetaLandscape local(
        geometry::AdaptedCoordinates(frame.chart, frame.field, centre.p, local_half, local_half, sub_step),
        frame.band);
    at0 = local.derivatives(Vector2d::Zero(), h);
    const BetaLandscape::Sample s0 = local.at(0.0, 0.0);
    bm.theta0 = s0.theta;
    bm.norm_b0 = s0.norm_b;
  }
  bm.p0 = centre.p;
  bm.x0 = centre.x;
  bm.beta_min = at0.value;
  bm.hessian = at0.hessian;
  bm.gradient_norm = at0.gradient.norm();
  if (!spd(bm.hessian))
    throw AssumptionError("degenerate minimum: Hess beta is not positive definite, so the unique non-degenerate "
                          "minimum hypothesis fails");

  // |B| over the sampled closure: every node, several depths.
  double bmin = std::numeric_limits<double>::infinity();
  const std::size_t layers = std::max<std::size_t>(1, options.depth_layers);
  for (std::size_t k = 0; k < frame.gamma.size(); ++k)
    for (std::size_t l = 0; l < layers; ++l) {
      const double t = layers == 1 ? 0.0 : options.depth * static_cast<double>(l) / static_cast<double>(layers - 1);
      bmin = std::min(bmin, frame.field.strength(frame.gamma[k] - t * frame.normal[k]));
    }
  bm.b_min_sampled = bmin;
  bm.b_min = options.margin * bmin;

  bm.d0 = compute_d0(bm);
  bm.gap_coeff = std::sqrt(bm.hessian.determinant() /
                           (bm.norm_b0 * bm.norm_b0 * std::sin(bm.theta0) * std::sin(bm.theta0)));

  // Uniqueness probe: 3x3 starts spread over the interior of the patch.
  if (options.multistart) {
    std::array<Vector2d, 9> starts;
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        starts[3 * a + b] = Vector2d(inner_lo.x() + 0.5 * a * (inner_hi.x() - inner_lo.x()),
                                     inner_lo.y() + 0.5 * b * (inner_hi.y() - inner_lo.y()));
    std::array<NewtonRun, 9> runs;
    parallel_for(9, [&](std::size_t b, std::size_t e) {
      for (std::size_t k = b; k < e; ++k) runs[k] = newton(land, starts[k], h, lo, hi, options.max_newton);
    });
    double spread = 0.0;
    std::size_t converged = 0;
    for (const auto& r : runs) {
      if (r.converged) ++converged;
      spread = std::max(spread, (r.rs - first.rs).norm());
    }
    bm.starts_converged = converged;
    bm.uniqueness_spread = spread;
    bm.verdicts.unique = converged == runs.size() && spread < 1e-6;
    if (!bm.verdicts.unique)
      warn("minimize_beta: multi-start probe is not unanimous (" + std::to_string(converged) +
           "/9 converged, spread " + std::to_string(spread) + ")");
  } else {
    bm.verdicts.unique = true;
  }

  bm.verdicts.localized = true;
  bm.verdicts.hessian_spd = true;
  bm.verdicts.beta_below_b_min = bm.beta_min < bm.b_min;
  bm.verdicts.theta_interior = bm.theta0 > 0 && bm.theta0 < std::numbers::pi / 2;
  return bm;
}

double compute_d0(const BetaMinimum& bm) {
  const double det = bm.hessian.determinant();
  if (!(det > 0) || !(bm.norm_b0 > 0) || !(std::sin(bm.theta0) > 0))
    throw std::invalid_argument("compute_d0: needs an SPD Hessian, |B(x0)| > 0 and theta0 in (0, pi/2)");
  return std::sqrt(det) / (bm.norm_b0 * std::sin(bm.theta0));
}

}  // namespace magspec::beta
