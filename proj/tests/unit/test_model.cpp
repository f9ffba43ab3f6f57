#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "doctest.h"
#include "magspec/error.hpp"
#include "magspec/log.hpp"
#include "magspec/model/band_curve.hpp"
#include "magspec/model/degennes.hpp"
#include "magspec/model/lupan.hpp"
#include "magspec/model/model_operator.hpp"
#include "unit/dense_oracle.hpp"

using namespace magspec;
using namespace magspec::model;

namespace {

constexpr double kPi = std::numbers::pi;

// Same cell-centred de Gennes matrix, diagonalized densely.
double dense_degennes(double xi, int n, double t_max) {
  const double dt = t_max / n, c = 1.0 / (dt * dt);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    const double t = (j + 0.5) * dt;
    m(j, j) = 2 * c + (t - xi) * (t - xi);
    if (j > 0) m(j, j - 1) = m(j - 1, j) = -c;
  }
  m(0, 0) -= c;
  m(n - 1, n - 1) += c;
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(m, Eigen::EigenvaluesOnly).eigenvalues()(0);
}

BandCurve synthetic_curve() {
  std::vector<BandSample> s;
  for (double th : {0.2, 0.5, 0.8, 1.1}) s.push_back({th, 0.59 + 0.4 * std::sin(th) * std::sin(th), {}, 0.0, 0});
  return BandCurve(s, 0.5901);
}

}  // namespace

TEST_CASE("degennes_ground: xi = 0 gives the full-line oscillator ground energy") {
  CHECK(degennes_ground(0.0) == doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("degennes_ground: far field xi = 8 approaches 1") {
  CHECK(std::abs(degennes_ground(8.0) - 1.0) < 1e-3);
}

TEST_CASE("degennes_ground: Sturm bisection agrees with dense diagonalization") {
  for (double xi : {-1.0, 0.0, 0.5, 0.768, 2.0, 5.0})
    CHECK(std::abs(degennes_ground(xi, 400, 16.0) - dense_degennes(xi, 400, 16.0)) < 1e-10);
}

TEST_CASE("degennes_minimum: Theta0 ~ 0.5901, stable under grid halving") {
  const DeGennesMinimum coarse = degennes_minimum(2000);
  const DeGennesMinimum fine = degennes_minimum(4000);
  CHECK(std::abs(fine.theta0 - 0.5901) < 1e-3);
  CHECK(std::abs(fine.xi0 - std::sqrt(fine.theta0)) < 1e-3);  // classical identity xi0^2 = Theta0
  CHECK(std::abs(fine.theta0 - coarse.theta0) < 1e-4);
  // The minimum really is one: neighbours lie above.
  CHECK(degennes_ground(fine.xi0 - 0.05) > fine.theta0);
  CHECK(degennes_ground(fine.xi0 + 0.05) > fine.theta0);
}

TEST_CASE("degennes_ground: preconditions") {
  CHECK_THROWS_AS(degennes_ground(0.0, 100, 20.0), std::invalid_argument);
  CHECK_THROWS_AS(degennes_ground(0.0, 4000, 10.0), std::invalid_argument);
}

TEST_CASE("HalfPlaneGrid: invariants") {
  HalfPlaneGrid g;
  CHECK_NOTHROW(g.validate());
  CHECK(g.ds() == doctest::Approx(40.0 / 401.0));
  CHECK(g.t(0) == doctest::Approx(0.5 * g.dt()));
  g.s_min = 1.0;
  CHECK_THROWS_AS(g.validate(), std::invalid_argument);
  const HalfPlaneGrid h = HalfPlaneGrid::with_spacing(-5, 5, 10, 0.1, 0.2);
  CHECK(h.ds() <= 0.1 + 1e-12);
  CHECK(h.dt() <= 0.2 + 1e-12);
}

TEST_CASE("lupan_matrix: exactly hermitian, matches dense oracle on a small box") {
  HalfPlaneGrid g = HalfPlaneGrid::with_spacing(-3, 3, 4, 0.5, 0.5);
  const auto a = lupan_matrix(0.7, g);
  CHECK(a.is_exactly_hermitian());
  REQUIRE(a.nrows() <= 200);
  const auto exact = testing::dense_eigenvalues(a);
  LuPanOptions o;
  o.tol = 1e-10;
  const LuPanResult r = lupan_solve(0.7, g, o);
  CHECK(std::abs(r.energy - exact[0]) < 1e-9);
}

TEST_CASE("lupan_energy: default box near pi/2 and the edge-mass guard") {
  // The state is barely bound there, so the default box confines it: the
  // value lands near 1 and the a posteriori check refuses to certify it.
  const LuPanResult r = lupan_solve(kPi / 2 - 0.01, HalfPlaneGrid{});
  CHECK(r.energy > 0.95);
  CHECK(r.energy < 1.01);
  CHECK(r.edge_mass.total > 1e-8);
  CHECK_THROWS_AS(lupan_energy(kPi / 2 - 0.01, HalfPlaneGrid{}), BoxTooSmallError);
}

TEST_CASE("lupan_energy: ordering e(0.02) < e(pi/4) < e(pi/2 - 0.01) and Theta0 below all") {
  AutoBoxOptions o;
  o.ds = o.dt = 0.2;
  const double theta0 = degennes_minimum().theta0;
  const double small = lupan_energy_auto(0.02, o).energy;
  const double mid = lupan_energy_auto(kPi / 4, o).energy;
  const double top = lupan_solve(kPi / 2 - 0.01, HalfPlaneGrid::with_spacing(-20, 20, 20, 0.2, 0.2)).energy;
  CHECK(theta0 < small);
  CHECK(small < mid);
  CHECK(mid < top);
}

TEST_CASE("lupan_energy: second-order grid convergence at pi/4 (Richardson ratio in [3, 5])") {
  double e[3];
  const double spacing[3] = {0.4, 0.2, 0.1};
  for (int k = 0; k < 3; ++k)
    e[k] = lupan_energy(kPi / 4, HalfPlaneGrid::with_spacing(-10, 30, 30, spacing[k], spacing[k], 8.0));
  const double ratio = (e[0] - e[1]) / (e[1] - e[2]);
  CHECK(ratio > 3.0);
  CHECK(ratio < 5.0);
}

TEST_CASE("lupan_energy: doubling the box at pi/4 moves e by < 1e-8") {
  const double base = lupan_energy(kPi / 4, HalfPlaneGrid::with_spacing(-12, 36, 36, 0.2, 0.2, 8.0));
  const double big = lupan_energy(kPi / 4, HalfPlaneGrid::with_spacing(-24, 72, 72, 0.2, 0.2, 8.0));
  CHECK(std::abs(base - big) < 1e-8);
}

TEST_CASE("lupan_energy_auto: box follows the well to large s for small theta") {
  AutoBoxOptions o;
  o.ds = o.dt = 0.2;
  const LuPanResult r = lupan_energy_auto(0.05, o);
  CHECK(r.edge_mass.total <= o.solve.edge_mass_limit);
  CHECK(r.grid.s_max > 0.768 / std::tan(0.05));
}

TEST_CASE("BandCurve: collocation, monotone midpoints, evenness") {
  const BandCurve c = synthetic_curve();
  set_warnings_muted(true);
  for (const auto& s : c.samples()) CHECK(c(s.theta) == s.energy);
  const auto& th = c.samples();
  for (std::size_t k = 0; k + 1 < th.size(); ++k) {
    const double mid = c(0.5 * (th[k].theta + th[k + 1].theta));
    CHECK(mid > th[k].energy);
    CHECK(mid < th[k + 1].energy);
  }
  for (double t : {0.1, 0.3, 0.77, 1.0}) CHECK(c(-t) == c(t));
  set_warnings_muted(false);
}

TEST_CASE("BandCurve: dense sweep is monotone and within [Theta0, 1]") {
  const BandCurve c = synthetic_curve();
  set_warnings_muted(true);
  double prev = c(0.0);
  CHECK(prev == doctest::Approx(c.theta0_value()));
  for (int k = 1; k <= 2000; ++k) {
    const double v = c(kPi / 2 * k / 2000.0);
    CHECK(v >= prev);
    CHECK(v >= c.theta0_value());
    CHECK(v <= 1.0);
    prev = v;
  }
  CHECK(c(kPi / 2) == doctest::Approx(1.0));
  CHECK(c(3.0) == doctest::Approx(1.0));
  set_warnings_muted(false);
}

TEST_CASE("BandCurve: analytic derivative matches central differences") {
  const BandCurve c = synthetic_curve();
  for (double t : {0.25, 0.4, 0.65, 0.9, 1.05}) {
    const double fd = (c(t + 1e-6) - c(t - 1e-6)) / 2e-6;
    CHECK(std::abs(c.derivative(t) - fd) < 1e-6);
    CHECK(c.derivative(-t) == -c.derivative(t));
    const double fd2 = (c.derivative(t + 1e-6) - c.derivative(t - 1e-6)) / 2e-6;
    CHECK(std::abs(c.second_derivative(t) - fd2) < 1e-5);
  }
}

TEST_CASE("BandCurve: coefficient table reproduces the interpolant") {
  const BandCurve c = synthetic_curve();
  const auto coef = c.coefficients();
  const auto& kx = c.knot_thetas();
  for (std::size_t k = 1; k + 2 < kx.size(); ++k) {
    const double x = 0.3 * kx[k] + 0.7 * kx[k + 1], u = x - kx[k];
    const auto& a = coef[k];
    CHECK(a[0] + u * (a[1] + u * (a[2] + u * a[3])) == doctest::Approx(c(x)).epsilon(1e-12));
  }
}

TEST_CASE("BandCurve: JSON round trip and CSV layout") {
  const BandCurve c = synthetic_curve();
  const auto j = c.to_json();
  CHECK(j.at("schema").is_number_integer());
  const BandCurve d = BandCurve::from_json(nlohmann::json::parse(j.dump()));
  for (double t : {0.25, 0.33, 0.9}) CHECK(d(t) == c(t));
  std::ostringstream os;
  c.write_csv(os);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  CHECK(line == "theta,energy");
  int rows = 0;
  while (std::getline(is, line)) ++rows;
  CHECK(rows == 4);
}

TEST_CASE("BandCurve: decreasing samples are rejected") {
  std::vector<BandSample> s{{0.2, 0.7, {}, 0.0, 0}, {0.4, 0.65, {}, 0.0, 0}};
  CHECK_THROWS_AS(BandCurve(s, 0.59), SolverError);
}

TEST_CASE("build_band_curve: fixed coarse grid gives an increasing curve") {
  const HalfPlaneGrid g = HalfPlaneGrid::with_spacing(-12, 36, 36, 0.25, 0.25, 8.0);
  const BandCurve c = build_band_curve({0.5, 0.7, 0.9}, g);
  const auto e = c.energies();
  CHECK(e[0] < e[1]);
  CHECK(e[1] < e[2]);
  CHECK(c.theta0_value() < e[0]);
  CHECK_THROWS_AS(build_band_curve({0.7, 0.5}, g), std::invalid_argument);
}

TEST_CASE("model_spectrum_formula: closed-form cases") {
  const auto a = model_spectrum_formula(1.0, 0.0, 0.0, 0.0, 1.0, 4);
  for (int n = 1; n <= 4; ++n) CHECK(a.eigenvalues[n - 1].real() == doctest::Approx(n - 0.5));
  const auto b = model_spectrum_formula(2.0, 5.0, 0.0, 0.0, 0.1, 2);
  CHECK(b.eigenvalues[0].real() == doctest::Approx(5.1));
  CHECK(b.eigenvalues[1].real() == doctest::Approx(5.3));  // (d0/2)(2*2 - 1)h + 5
  const auto published = model_spectrum_formula(1.0, 0.0, 1.0, 0.0, 1.0, 3, ShiftConvention::AsPublished);
  for (int n = 1; n <= 3; ++n) CHECK(published.eigenvalues[n - 1].real() == doctest::Approx((2 * n - 1) / 2.0 - 1.0));
  const auto exact = model_spectrum_formula(1.0, 0.0, 1.0, 0.0, 1.0, 3);
  for (int n = 1; n <= 3; ++n) CHECK(exact.eigenvalues[n - 1].real() == doctest::Approx((2 * n - 1) / 2.0 - 0.5));
}

TEST_CASE("model_spectrum_numeric: selfadjoint case matches the oscillator levels") {
  const auto num = model_spectrum_numeric(1.3, 0.0, 0.0, 0.05, 0, 5, 0.6);
  const auto f = model_spectrum_formula(1.3, 0.6, 0.0, 0.0, 0.05, 5);
  for (int n = 0; n < 5; ++n) {
    CHECK(std::abs(num.eigenvalues[n] - f.eigenvalues[n]) <= 1e-6 * std::abs(f.eigenvalues[n]));
    CHECK(std::abs(num.eigenvalues[n].imag()) <= 1e-10);
  }
}

TEST_CASE("model_spectrum_numeric: real shift alpha = 1 follows completing the square") {
  const auto num = model_spectrum_numeric(1.0, 1.0, 0.0, 0.05, 0, 5);
  const auto f = model_spectrum_formula(1.0, 0.0, 1.0, 0.0, 0.05, 5);
  // lambda_1 is exactly 0 here, so the relative test is floored at the level spacing scale d0 h.
  for (int n = 0; n < 5; ++n)
    CHECK(std::abs(num.eigenvalues[n] - f.eigenvalues[n]) <= 1e-6 * std::max(std::abs(f.eigenvalues[n]), 0.05));
  // The published constant is off by the factor 1/2 and visibly disagrees.
  const auto p = model_spectrum_formula(1.0, 0.0, 1.0, 0.0, 0.05, 1, ShiftConvention::AsPublished);
  CHECK(std::abs(num.eigenvalues[0] - p.eigenvalues[0]) > 1e-3);
}

TEST_CASE("model_spectrum_numeric: imaginary shifts give a real spectrum") {
  const cdouble alpha{0.0, 0.3}, beta{0.0, 0.2};
  const auto num = model_spectrum_numeric(1.0, alpha, beta, 0.05, 0, 5, 0.6);
  const auto f = model_spectrum_formula(1.0, 0.6, alpha, beta, 0.05, 5);
  for (int n = 0; n < 5; ++n) {
    CHECK(std::abs(num.eigenvalues[n].imag()) <= 1e-8);
    CHECK(std::abs(num.eigenvalues[n] - f.eigenvalues[n]) <= 1e-6 * std::abs(f.eigenvalues[n]));
  }
}

TEST_CASE("model_spectrum_numeric: reality whenever alpha^2 + beta^2 is real (property)") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 2; ++trial) {
    // alpha = a + ib, beta = c + id with ab + cd = 0.
    const double a = u(rng), b = u(rng), c = u(rng);
    const double d = std::abs(c) > 1e-3 ? -a * b / c : 0.0;
    const cdouble alpha{a, b}, beta{c, std::clamp(d, -1.0, 1.0)};
    if (std::abs((alpha * alpha + beta * beta).imag()) > 1e-14) continue;
    const auto num = model_spectrum_numeric(1.0, alpha, beta, 0.05, 0, 5, 0.6);
    for (const auto& l : num.eigenvalues) CHECK(std::abs(l.imag()) <= 1e-8);
  }
}

TEST_CASE("model_spectrum_numeric: under-resolved grid is rejected") {
  CHECK_THROWS_AS(model_spectrum_numeric(1.0, 0.0, 0.0, 0.05, 64, 5), std::invalid_argument);
}

TEST_CASE("model_resolvent_bound_check: selfadjoint case gives ratio 1") {
  const double d0 = 1.0, h = 0.05;
  const auto rep = model_resolvent_bound_check(d0, 0.0, 0.0, h, {cdouble(1.0, 0.0), cdouble(1.2, 0.0)});
  for (const auto& s : rep.samples) {
    REQUIRE_FALSE(s.skipped);
    CHECK(s.ratio == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("model_resolvent_bound_check: off-axis sample and near-spectrum skip") {
  const double d0 = 1.0, h = 0.05;
  const auto rep = model_resolvent_bound_check(d0, cdouble(0.3, 0.1), cdouble(-0.2, 0.4), h,
                                               {cdouble(0.5, 1.0), cdouble(0.5, 0.0)});
  CHECK(std::isfinite(rep.samples[0].ratio));
  CHECK(rep.samples[0].ratio >= 1.0 - 1e-9);
  CHECK(rep.samples[1].skipped);
}

TEST_CASE("model_resolvent_bound_check: disc of radius 3, |alpha|, |beta| <= 1") {
  const auto mus = disc_samples(0.0, 3.0, 3, 8);
  const auto rep = model_resolvent_bound_check(1.0, cdouble(0.6, -0.5), cdouble(0.3, 0.7), 0.05, mus);
  CHECK(std::isfinite(rep.max_ratio));
  CHECK(rep.max_ratio < 100.0);
}
