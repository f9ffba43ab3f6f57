#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "doctest.h"
#include "magspec/beta/beta_minimum.hpp"
#include "magspec/beta/fit.hpp"
#include "magspec/beta/prediction.hpp"
#include "magspec/error.hpp"
#include "magspec/geometry/adapted_frame.hpp"
#include "magspec/geometry/chart.hpp"
#include "magspec/geometry/magnetic_field.hpp"
#include "magspec/log.hpp"
#include "unit/synthetic_band.hpp"

using namespace magspec;
using namespace magspec::beta;
using namespace magspec::geometry;
using Eigen::Matrix2d;
using Eigen::Vector2d;

namespace {

constexpr double kPi = std::numbers::pi;

AdaptedFrame flat_frame(const MagneticField& field, Vector2d origin = {0.0, 0.0}, double rotation = 0.0) {
  FrameSpec spec;
  spec.chart = std::make_shared<PlaneChart>(rotation);
  spec.field = field;
  spec.origin = origin;
  spec.step = 0.05;
  return build_frame(spec, testing::synthetic_band());
}

MagneticField scaled(const MagneticField& f, double c) {
  VectorPolynomial a = f.base_potential();
  for (auto& comp : a) comp = c * comp;
  return MagneticField(f.name() + "-scaled", a);
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST_CASE("richardson_derivatives: smooth function to fourth order") {
  auto f = [](double r, double s) { return std::exp(r) * std::sin(s) + r * r * s; };
  const Vector2d p(0.3, -0.4);
  const Derivatives d = richardson_derivatives(f, p, 0.05);
  const double er = std::exp(0.3), sn = std::sin(-0.4), cs = std::cos(-0.4);
  CHECK(std::abs(d.gradient.x() - (er * sn + 2 * 0.3 * -0.4)) < 1e-7);
  CHECK(std::abs(d.gradient.y() - (er * cs + 0.09)) < 1e-7);
  CHECK(std::abs(d.hessian(0, 0) - (er * sn + 2 * -0.4)) < 1e-7);
  CHECK(std::abs(d.hessian(0, 1) - (er * cs + 0.6)) < 1e-7);
  CHECK(std::abs(d.hessian(1, 1) + er * sn) < 1e-7);
  CHECK_THROWS_AS(richardson_derivatives(f, p, 0.0), std::invalid_argument);
}

TEST_CASE("minimize_beta: flat boundary with |B| = 1 + r^2 + 2 s^2 at theta0 = pi/4") {
  const auto band = testing::synthetic_band();
  const double e = band->evaluate(kPi / 4);
  const BetaMinimum bm = minimize_beta(flat_frame(flat_quadratic_field(kPi / 4, 1.0, 2.0)));
  CHECK(bm.p0.norm() < 1e-8);
  CHECK(std::abs(bm.x0.z()) < 1e-12);
  CHECK(rel(bm.beta_min, e) < 1e-12);
  CHECK(std::abs(bm.theta0 - kPi / 4) < 1e-12);
  CHECK(rel(bm.norm_b0, 1.0) < 1e-12);
  CHECK(rel(bm.hessian(0, 0), 2 * e) < 1e-6);
  CHECK(rel(bm.hessian(1, 1), 4 * e) < 1e-6);
  CHECK(std::abs(bm.hessian(0, 1)) < 1e-6);
  CHECK(bm.hessian(0, 1) == bm.hessian(1, 0));
  // sqrt(det) / (|B| sin theta0) = e sqrt(8) / (sqrt(2) / 2) = 4 e with |B(x0)| = 1.
  CHECK(rel(bm.d0, 4 * e) < 1e-6);
  CHECK(rel(compute_d0(bm), bm.gap_coeff) < 1e-12);
  CHECK(bm.gradient_norm < 1e-8 * bm.beta_min);
  CHECK(bm.b_min_sampled == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(bm.b_min == doctest::Approx(0.999).epsilon(1e-12));
  CHECK(bm.verdicts.all());
  CHECK(bm.starts_converged == 9);
  CHECK(bm.uniqueness_spread < 1e-6);
}

TEST_CASE("minimize_beta: off-grid minimizer is found by Newton") {
  const auto band = testing::synthetic_band();
  const double e = band->evaluate(kPi / 4);
  const BetaMinimum bm = minimize_beta(flat_frame(flat_quadratic_field(kPi / 4, 1.0, 2.0), {0.13, -0.07}));
  CHECK(bm.p0.norm() < 1e-8);
  CHECK((bm.rs0 - Vector2d(-0.13, 0.07)).norm() < 1e-8);
  CHECK(rel(bm.hessian(0, 0), 2 * e) < 1e-6);
  CHECK(rel(bm.hessian(1, 1), 4 * e) < 1e-6);
  CHECK(bm.verdicts.unique);
}

TEST_CASE("minimize_beta: invariants across random flat quadratic fields (property)") {
  const auto band = testing::synthetic_band();
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> coef(0.3, 2.0), incl(0.3, 1.2);
  for (int trial = 0; trial < 4; ++trial) {
    const double a = coef(rng), b = coef(rng), th = incl(rng);
    const BetaMinimum bm = minimize_beta(flat_frame(flat_quadratic_field(th, a, b)));
    const double e = band->evaluate(th);
    Eigen::SelfAdjointEigenSolver<Matrix2d> es(bm.hessian);
    CHECK(es.eigenvalues().minCoeff() > 1e-10);
    CHECK(bm.beta_min < bm.b_min);
    CHECK(bm.theta0 > 0);
    CHECK(bm.theta0 < kPi / 2);
    CHECK(rel(bm.hessian.determinant(), 4 * a * b * e * e) < 1e-6);
    CHECK(rel(bm.d0, 2 * e * std::sqrt(a * b) / std::sin(th)) < 1e-6);
    CHECK(rel(bm.d0, bm.gap_coeff) < 1e-12);
  }
}

TEST_CASE("minimize_beta: d0 is invariant under B -> cB") {
  const MagneticField base = flat_quadratic_field(0.8, 0.7, 1.3);
  const BetaMinimum b1 = minimize_beta(flat_frame(base));
  const BetaMinimum b3 = minimize_beta(flat_frame(scaled(base, 3.0)));
  CHECK(rel(b3.beta_min, 3.0 * b1.beta_min) < 1e-12);
  CHECK(rel(b3.d0, b1.d0) < 1e-10);
}

TEST_CASE("minimize_beta: det Hess is unchanged by a rotation of the flat chart and of the (r, s) axes") {
  const MagneticField field = flat_quadratic_field(0.7, 0.9, 1.6);
  const BetaMinimum b0 = minimize_beta(flat_frame(field));
  const BetaMinimum b1 = minimize_beta(flat_frame(field, {0.0, 0.0}, 0.6));
  CHECK(rel(b1.hessian.determinant(), b0.hessian.determinant()) < 1e-6);

  const BetaLandscape land(AdaptedCoordinates(std::make_shared<PlaneChart>(), field, {0.0, 0.0}, 0.5, 0.5, 0.01),
                           testing::synthetic_band());
  const double phi = 0.45;
  const Matrix2d rot = Eigen::Rotation2Dd(phi).toRotationMatrix();
  auto rotated = [&](double u, double v) {
    const Vector2d q = rot * Vector2d(u, v);
    return land.at(q.x(), q.y()).beta;
  };
  const Derivatives dr = richardson_derivatives(rotated, Vector2d::Zero(), 0.05);
  CHECK(rel(dr.hessian.determinant(), b0.hessian.determinant()) < 1e-6);
  CHECK(std::abs(dr.hessian(0, 1)) > 1e-3);  // the rotated frame really is rotated
}

TEST_CASE("minimize_beta: beta is gauge independent") {
  const MagneticField base = flat_quadratic_field(kPi / 4, 1.0, 2.0);
  const BetaMinimum b0 = minimize_beta(flat_frame(base));
  const BetaMinimum b1 = minimize_beta(flat_frame(base.with_gauge(quadratic_gauge(0.3, -1.1, 0.7))));
  CHECK(b0.beta_min == b1.beta_min);
  CHECK(b0.hessian == b1.hessian);
}

TEST_CASE("minimize_beta: a degenerate minimum is rejected") {
  try {
    minimize_beta(flat_frame(flat_quadratic_field(kPi / 4, 1.0, 0.0)));
    FAIL("expected AssumptionError");
  } catch (const AssumptionError& e) {
    CHECK(std::string(e.what()).find("degenerate minimum") != std::string::npos);
  }
}

TEST_CASE("minimize_beta: constant-norm field on a sphere puts the minimum on the patch edge") {
  FrameSpec spec;
  spec.chart = sphere_chart(2);
  spec.field = constant_field({0.0, 0.0, 1.0});
  spec.origin = {0.0, 0.6};
  spec.r_half = spec.s_half = 0.3;
  spec.step = 0.05;
  const AdaptedFrame frame = build_frame(spec, testing::synthetic_band());
  try {
    minimize_beta(frame);
    FAIL("expected AssumptionError");
  } catch (const AssumptionError& e) {
    CHECK(std::string(e.what()).find("minimum not localized in patch") != std::string::npos);
  }
}

TEST_CASE("minimize_beta: needs sampled beta") {
  FrameSpec spec;
  spec.chart = std::make_shared<PlaneChart>();
  spec.field = flat_quadratic_field(kPi / 4);
  const AdaptedFrame frame = build_frame(spec, nullptr);
  CHECK_THROWS_AS(minimize_beta(frame), std::invalid_argument);
}

TEST_CASE("BetaMinimum: JSON carries the certified quantities") {
  const BetaMinimum bm = minimize_beta(flat_frame(flat_quadratic_field(kPi / 4, 1.0, 2.0)));
  const auto j = bm.to_json();
  for (const char* key : {"p0", "x0", "beta_min", "b_min", "hessian", "theta0", "normB0", "d0", "gap_coeff", "verdicts"})
    CHECK(j.contains(key));
  CHECK(j["hessian"][1][1].get<double>() == bm.hessian(1, 1));
}

TEST_CASE("predict_spectrum: known-terms mode") {
  const Prediction p = predict_spectrum(0.6, 1.5, {0.0, 0.05, 0.1}, 4);
  CHECK(p.mode == "known-terms");
  CHECK_FALSE(p.fitted.has_value());
  REQUIRE(p.rows.size() == 12);
  for (int n = 0; n < 4; ++n) CHECK(p.rows[n].value == 0.0);
  for (std::size_t hi = 1; hi < 3; ++hi) {
    const double h = p.h_list[hi];
    CHECK(std::abs((p.rows[4 * hi + 1].value - p.rows[4 * hi].value) - 1.5 * h * h) < 1e-15);
    for (int n = 1; n < 4; ++n) CHECK(p.rows[4 * hi + n].value > p.rows[4 * hi + n - 1].value);
  }
  std::ostringstream os;
  p.write_csv(os);
  CHECK(os.str().rfind("h,n,value,mode\n", 0) == 0);
  CHECK(os.str().find("known-terms") != std::string::npos);
  CHECK_THROWS_AS(predict_spectrum(0.6, 1.5, {0.1}, 0), std::invalid_argument);
}

namespace {

std::vector<SpectralSample> synthetic_samples(double contamination, const std::vector<double>& hs, int n_max = 3) {
  std::vector<SpectralSample> out;
  for (double h : hs)
    for (int n = 1; n <= n_max; ++n) {
      const double lam =
          0.6 * h + 0.2 * std::pow(h, 1.5) + (1.5 * (n - 0.5) + 0.3) * h * h + contamination * std::pow(h, 2.5);
      out.push_back({h, n, lam});
    }
  return out;
}

const std::vector<double> kH{0.02, 0.03, 0.045, 0.065, 0.1};

}  // namespace

TEST_CASE("fit_expansion: exact recovery of its own model") {
  const ExpansionFit f = fit_expansion(synthetic_samples(0.0, kH));
  CHECK(std::abs(f.beta_min - 0.6) < 1e-10);
  CHECK(std::abs(f.c0 - 0.2) < 1e-10);
  CHECK(std::abs(f.gap_coeff - 1.5) < 1e-10);
  CHECK(std::abs(f.c1 - 0.3) < 1e-10);
  CHECK(f.max_residual < 1e-12);
  for (const auto& s : synthetic_samples(0.0, kH)) CHECK(std::abs(f.lambda(s.h, s.n) - s.lambda) < 1e-12 * s.h);
}

TEST_CASE("fit_expansion: bias from an h^{5/2} term matches the interpolation oracle") {
  // With three h values the fit interpolates; the unmodelled c x^3 (x = h^{1/2})
  // moves the intercept by exactly c x1 x2 x3.
  const std::vector<double> hs{0.02, 0.05, 0.1};
  for (double c : {1.0, -1.0, 0.25}) {
    const ExpansionFit f = fit_expansion(synthetic_samples(c, hs));
    CHECK(std::abs(f.beta_min - 0.6 - c * std::sqrt(hs[0] * hs[1] * hs[2])) < 1e-11);
    CHECK(std::abs(f.gap_coeff - 1.5) < 1e-10);  // the contamination is common to all levels
  }
}

TEST_CASE("fit_expansion: small o(h^2) contamination leaves beta within 1e-3") {
  for (double c : {0.05, -0.05}) {
    const ExpansionFit f = fit_expansion(synthetic_samples(c, {0.02, 0.03, 0.04, 0.05, 0.06, 0.08, 0.1}));
    CHECK(std::abs(f.beta_min - 0.6) < 1e-3);
    CHECK(f.beta_min_stderr > 0);
  }
}

TEST_CASE("fit_expansion: fitted predictions reproduce the fit") {
  const auto samples = synthetic_samples(0.5, kH, 2);
  const ExpansionFit f = fit_expansion(samples);
  const Prediction p = predict_spectrum(f.beta_min, f.gap_coeff, kH, 2, FittedConstants{f.c0, f.c1});
  CHECK(p.mode == "fitted");
  for (const auto& row : p.rows) CHECK(std::abs(row.value - f.lambda(row.h, row.n)) < 1e-12);
}

TEST_CASE("fit_expansion: preconditions and conditioning") {
  CHECK_THROWS_AS(fit_expansion(synthetic_samples(0.0, {0.05, 0.1})), ConfigError);
  CHECK_THROWS_AS(fit_expansion(synthetic_samples(0.0, {0.005, 0.05, 0.1})), ConfigError);
  CHECK_THROWS_AS(fit_expansion({}), ConfigError);
  try {
    fit_expansion(synthetic_samples(0.0, {0.05, 0.05 + 1e-9, 0.05 + 2e-9}));
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("wider range of h") != std::string::npos);
  }
}

TEST_CASE("fit_expansion: JSON has values, errors and covariance") {
  const auto j = fit_expansion(synthetic_samples(0.3, kH)).to_json();
  CHECK(j["beta_min"].contains("stderr"));
  CHECK(j["c_terms"].size() == 3);
  CHECK(j["covariance"].size() == 5);
}

TEST_CASE("power_law_exponent: exact powers") {
  std::vector<double> h{0.02, 0.05, 0.1}, y;
  for (double v : h) y.push_back(3.0 * v * v);
  CHECK(power_law_exponent(h, y) == doctest::Approx(2.0).epsilon(1e-12));
}
