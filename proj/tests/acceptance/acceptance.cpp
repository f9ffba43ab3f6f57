// Acceptance run: one PASS/FAIL line per criterion at its pinned tolerance.
//
//   magspec_acceptance [--only 2,5] [--out DIR]
//
// The exit status is nonzero only when a criterion fails that is not listed
// in kKnownUnattainable; README.md explains each listed one.

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <numbers>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "magspec/beta/beta_minimum.hpp"
#include "magspec/direct/box_problem.hpp"
#include "magspec/direct/campaign.hpp"
#include "magspec/direct/localization.hpp"
#include "magspec/geometry/adapted_frame.hpp"
#include "magspec/geometry/gauge.hpp"
#include "magspec/io/commands.hpp"
#include "magspec/linalg/eigensolver.hpp"
#include "magspec/model/band_curve.hpp"
#include "magspec/model/degennes.hpp"
#include "magspec/model/lupan.hpp"
#include "magspec/model/model_operator.hpp"
#include "magspec/schema.hpp"

namespace fs = std::filesystem;
using namespace magspec;
using Eigen::Vector3d;

namespace {

constexpr double kPi = std::numbers::pi;
const std::set<int> kKnownUnattainable{1, 5};

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

struct Outcome {
  bool pass = false;
  std::string detail;
  nlohmann::json data = nlohmann::json::object();
};

std::string fmt(double v, int digits = 6) {
  std::ostringstream os;
  os.precision(digits);
  os << v;
  return os.str();
}

struct Context {
  fs::path out;
  std::shared_ptr<const model::BandCurve> band;
  std::optional<direct::ValidationTable> campaign;
  std::optional<beta::BetaMinimum> minimum;
  double campaign_seconds = 0.0;
  double beta_oracle = 0.0;
};

// ---------------------------------------------------------------------------

Outcome theta0_reproduction(Context&) {
  Stopwatch clock;
  const double e_small = model::lupan_energy_auto(0.02).energy;
  const model::DeGennesMinimum coarse = model::degennes_minimum(4000);
  const model::DeGennesMinimum fine = model::degennes_minimum(8000);
  const double t = clock.seconds();
  const double gap = std::abs(e_small - fine.theta0);
  const double drift = std::abs(fine.theta0 - coarse.theta0);
  Outcome o;
  o.pass = gap < 5e-3 && drift < 1e-4 && t < 120;
  o.detail = "e(0.02) = " + fmt(e_small, 8) + ", Theta0 = " + fmt(fine.theta0, 8) + ", |diff| = " + fmt(gap, 3) +
             " (< 5e-3); halving drift " + fmt(drift, 3) + " (< 1e-4); " + fmt(t, 3) + " s (< 120 s)";
  o.data = {{"e_002", e_small}, {"theta0", fine.theta0}, {"theta0_coarse", coarse.theta0}, {"seconds", t}};
  return o;
}

Outcome band_curve(Context& ctx) {
  Stopwatch clock;
  const model::BandCurve curve = model::build_band_curve_auto(model::default_band_thetas());
  const double t = clock.seconds();
  const double theta0 = curve.theta0_value();
  const auto e = curve.energies();
  bool increasing = e.size() == 25;
  for (std::size_t i = 1; i < e.size(); ++i) increasing = increasing && e[i] > e[i - 1];
  auto inside = [&](double v) { return v >= theta0 - 1e-3 && v <= 1.0 + 1e-3; };
  const double lo = curve.evaluate(0.0), hi = curve.evaluate(kPi / 2);
  bool in_range = inside(lo) && inside(hi);
  for (double v : e) in_range = in_range && inside(v);

  std::ofstream(ctx.out / "band_curve.csv") << [&] {
    std::ostringstream os;
    curve.write_csv(os);
    return os.str();
  }();
  nlohmann::json j = curve.to_json();
  std::ofstream(ctx.out / "band_curve.json") << j.dump(2) << '\n';
  ctx.band = std::make_shared<model::BandCurve>(curve);

  Outcome o;
  o.pass = increasing && in_range && t < 900;
  o.detail = std::to_string(e.size()) + " points, strictly increasing: " + (increasing ? "yes" : "no") +
             "; e(0+) = " + fmt(lo, 8) + ", e(pi/2-) = " + fmt(hi, 8) + ", samples in [" + fmt(e.front(), 8) + ", " +
             fmt(e.back(), 8) + "] within [Theta0 - 1e-3, 1 + 1e-3]: " + (in_range ? "yes" : "no") + "; " +
             fmt(t, 4) + " s (< 900 s)";
  o.data = {{"energies", e}, {"seconds", t}};
  return o;
}

Outcome model_operator(Context&) {
  Stopwatch clock;
  std::mt19937_64 rng(20261014);
  const double d0 = 2.0, p_eff0 = 0.6, h = 0.1;
  double worst_rel = 0.0, worst_imag = 0.0, worst_modulus = 0.0;
  nlohmann::json pairs = nlohmann::json::array();
  for (int s = 0; s < 5; ++s) {
    const auto [alpha, beta] = model::sample_real_shift_pair(rng);
    worst_modulus = std::max({worst_modulus, std::abs(alpha.real()), std::abs(alpha.imag()), std::abs(beta.real()),
                              std::abs(beta.imag())});
    const auto f = model::model_spectrum_formula(d0, p_eff0, alpha, beta, h, 5);
    const auto n = model::model_spectrum_numeric(d0, alpha, beta, h, 0, 5, p_eff0);
    for (std::size_t k = 0; k < 5; ++k) {
      worst_rel = std::max(worst_rel, std::abs(n.eigenvalues[k] - f.eigenvalues[k]) / std::abs(f.eigenvalues[k]));
      worst_imag = std::max(worst_imag, std::abs(n.eigenvalues[k].imag()));
    }
    pairs.push_back({{"alpha", {alpha.real(), alpha.imag()}}, {"beta", {beta.real(), beta.imag()}}});
  }
  const double t = clock.seconds();
  Outcome o;
  o.pass = worst_rel < 1e-6 && worst_imag <= 1e-8 && worst_modulus <= 1.0 && t < 60;
  o.detail = "5 random (alpha, beta) with real alpha^2 + beta^2, n <= 5: max rel mismatch " + fmt(worst_rel, 3) +
             " (< 1e-6), max |Im| " + fmt(worst_imag, 3) + " (<= 1e-8); " + fmt(t, 3) + " s (< 60 s)";
  o.data = {{"pairs", pairs}, {"max_rel", worst_rel}, {"max_imag", worst_imag}, {"seconds", t}};
  return o;
}

Outcome geometry_invariants(Context&) {
  using namespace geometry;
  Stopwatch clock;
  const auto band = std::make_shared<model::BandCurve>(
      std::vector<model::BandSample>{{0.05, 0.62, {}, 0.0, 0}, {0.8, 0.90, {}, 0.0, 0}, {1.5, 0.999, {}, 0.0, 0}},
      0.5901);
  auto sphere = [](double step) {
    FrameSpec s;
    s.chart = sphere_chart(2);
    s.field = constant_field({0.6, 0.2, 1.0});
    s.origin = {1.5, 0.6};
    s.r_half = s.s_half = 0.4;
    s.step = step;
    return s;
  };
  auto ellipsoid = [](double step) {
    FrameSpec s;
    s.chart = std::make_shared<EllipsoidChart>(Vector3d(1.0, 1.5, 2.0), 2);
    s.field = constant_field({0.3, 0.2, 1.0});
    s.origin = {0.4, 0.5};
    s.r_half = s.s_half = 0.4;
    s.step = step;
    return s;
  };
  auto flat = [](double step) {
    FrameSpec s;
    s.chart = std::make_shared<PlaneChart>(0.3);
    s.field = flat_quadratic_field(kPi / 4);
    s.step = step;
    return s;
  };

  bool ok = true;
  std::ostringstream detail;
  nlohmann::json data = nlohmann::json::object();
  for (const auto& [name, make] : std::vector<std::pair<std::string, std::function<FrameSpec(double)>>>{
           {"sphere", sphere}, {"ellipsoid", ellipsoid}, {"flat", flat}}) {
    const AdaptedFrame f = build_frame(make(0.05), band);
    const FrameInvariants inv = check_invariants(f, {0.0, 0.1, 0.2});
    const bool frame_ok = inv.unit_speed < 1e-6 && inv.orthogonality < 1e-6 && inv.alpha_on_axis < 1e-6 &&
                          inv.alpha_slope_on_axis < 1e-6 && inv.b1_on_axis < 1e-6 && inv.min_b2_on_axis > 0 &&
                          inv.norm_identity < 1e-8 && inv.remark_b2 < 1e-6 && inv.remark_b3 < 1e-6 &&
                          inv.metric_block < 1e-8 && inv.direct_basis;

    AdaptedFrame coarse = build_frame(make(0.1), band);
    AdaptedFrame fine = build_frame(make(0.05), band);
    const GaugeA gc = gauge_potential(coarse, uniform_t_grid(0.4, 4));
    const GaugeA gf = gauge_potential(fine, uniform_t_grid(0.4, 8));
    // The stated requirement is second-order convergence; the absolute bound
    // only guards against a residual that converges to the wrong field.
    const double ratio = gc.curl_residual / gf.curl_residual;
    const bool curl_ok = gf.relative_curl_residual < 1e-2 && ratio >= 3 && ratio <= 5;
    ok = ok && frame_ok && curl_ok;
    detail << name << ": frame " << (frame_ok ? "ok" : "FAILED") << ", unit speed " << fmt(inv.unit_speed, 2)
           << ", norm identity " << fmt(inv.norm_identity, 2) << ", metric block " << fmt(inv.metric_block, 2)
           << ", curl rel " << fmt(gf.relative_curl_residual, 2) << ", step-halving ratio " << fmt(ratio, 4)
           << " (in [3, 5]); ";
    data[name] = {{"unit_speed", inv.unit_speed},     {"orthogonality", inv.orthogonality},
                  {"alpha_on_axis", inv.alpha_on_axis}, {"norm_identity", inv.norm_identity},
                  {"metric_block", inv.metric_block},   {"curl_coarse", gc.curl_residual},
                  {"curl_fine", gf.curl_residual},      {"curl_ratio", ratio}};
  }
  const double t = clock.seconds();
  ok = ok && t < 60;
  detail << fmt(t, 3) << " s (< 60 s)";
  return {ok, detail.str(), data};
}

void ensure_band(Context& ctx) {
  if (ctx.band) return;
  const fs::path cached = ctx.out / "band_curve.json";
  if (fs::exists(cached)) {
    ctx.band = std::make_shared<model::BandCurve>(model::BandCurve::from_json(nlohmann::json::parse(std::ifstream(cached))));
    return;
  }
  ctx.band = std::make_shared<model::BandCurve>(model::build_band_curve_auto(model::default_band_thetas()));
}

void ensure_campaign(Context& ctx) {
  if (ctx.campaign) return;
  ensure_band(ctx);
  Stopwatch clock;
  geometry::FrameSpec spec;
  spec.chart = std::make_shared<geometry::PlaneChart>();
  spec.field = geometry::flat_quadratic_field(kPi / 4);
  const geometry::AdaptedFrame frame = geometry::build_frame(spec, ctx.band);
  ctx.minimum = beta::minimize_beta(frame);
  // Independent value: on this preset |B| = 1 + x^2/2 + y^2 and theta = pi/4
  // on the boundary, so the minimum is e(pi/4) at the origin.
  ctx.beta_oracle = ctx.band->evaluate(kPi / 4);
  ctx.campaign = direct::toy_validation(*ctx.minimum, spec.field);
  ctx.campaign_seconds = clock.seconds();
  nlohmann::json j = ctx.campaign->to_json();
  j["beta_minimum"] = ctx.minimum->to_json();
  j["schema"] = kSchemaVersion;
  std::ofstream(ctx.out / "validation_report.json") << j.dump(2) << '\n';
  std::ofstream csv(ctx.out / "validation.csv");
  ctx.campaign->write_csv(csv);
}

Outcome leading_order(Context& ctx) {
  ensure_campaign(ctx);
  const auto& v = *ctx.campaign;
  const double fitted = v.fit->beta_min;
  const double rel = std::abs(fitted - ctx.beta_oracle) / ctx.beta_oracle;
  std::ostringstream lam;
  for (const auto& r : v.runs) lam << "h=" << r.h << ": " << fmt(r.eigenvalues[0] / r.h, 7) << "  ";
  Outcome o;
  o.pass = rel < 0.05 && ctx.campaign_seconds < 1800;
  o.detail = "lambda1/h " + lam.str() + "-> extrapolated " + fmt(fitted, 6) + " +- " +
             fmt(v.fit->beta_min_stderr, 2) + " vs beta_min = e(pi/4) = " + fmt(ctx.beta_oracle, 8) +
             " (minimizer " + fmt(ctx.minimum->beta_min, 8) + "): rel err " + fmt(rel, 3) + " (< 0.05); campaign " +
             fmt(ctx.campaign_seconds, 4) + " s (< 1800 s)";
  o.data = {{"fitted", fitted}, {"oracle", ctx.beta_oracle}, {"rel_error", rel}, {"seconds", ctx.campaign_seconds}};
  return o;
}

Outcome gap_scaling(Context& ctx) {
  ensure_campaign(ctx);
  const auto& v = *ctx.campaign;
  const bool stretch = v.gap_rel_error < 0.35;
  Outcome o;
  o.pass = v.gap_exponent >= 1.6 && v.gap_exponent <= 2.4;
  o.detail = "exponent of lambda2 - lambda1 in h: " + fmt(v.gap_exponent, 4) + " (in [1.6, 2.4]); stretch (not gating): "
             "gap coefficient " + fmt(v.gap_coeff_fitted, 5) + " vs d0 = " + fmt(v.d0_predicted, 5) + ", rel err " +
             fmt(v.gap_rel_error, 3) + (stretch ? " (< 0.35, met)" : " (>= 0.35, not met)") + "; fitted C0 = " +
             fmt(v.fit->c0, 4) + " +- " + fmt(v.fit->c0_stderr, 2) + ", C1 = " + fmt(v.fit->c1, 4);
  o.data = {{"exponent", v.gap_exponent}, {"gap_coeff", v.gap_coeff_fitted}, {"d0", v.d0_predicted},
            {"stretch_met", stretch}, {"c0", v.fit->c0}, {"c0_stderr", v.fit->c0_stderr}, {"c1", v.fit->c1}};
  return o;
}

Outcome gauge_invariance(Context&) {
  using namespace direct;
  Stopwatch clock;
  const geometry::MagneticField base = geometry::flat_quadratic_field(kPi / 4);
  BoxProblem p = scaled_box(0.1, base, {0.0, 0.0}, {5.0, 6.0, 6.0});
  linalg::EigenOptions opts;
  opts.tol = 1e-11;
  opts.inner_tol = 1e-13;
  const double shift = 0.05;
  const auto ref = solve_lowest(p, 2, opts, shift);
  double worst = 0.0;
  nlohmann::json data = {{"unknowns", p.unknowns()}, {"reference", ref.eigenvalues}};
  for (const auto& [name, phi] : std::vector<std::pair<std::string, geometry::Polynomial3>>{
           {"linear", geometry::linear_gauge(0.7, -1.3)}, {"quadratic", geometry::quadratic_gauge(0.4, -0.9, 1.1)}}) {
    BoxProblem q = p;
    q.field = base.with_gauge(phi);
    const auto rep = solve_lowest(q, 2, opts, shift);
    for (std::size_t k = 0; k < 2; ++k)
      worst = std::max(worst, std::abs(rep.eigenvalues[k] - ref.eigenvalues[k]) / ref.eigenvalues[k]);
    data[name] = rep.eigenvalues;
  }
  const double t = clock.seconds();
  Outcome o;
  o.pass = p.unknowns() >= 100000 && worst < 1e-9 && t < 300;
  o.detail = std::to_string(p.unknowns()) + " unknowns, lowest 2 levels under linear and quadratic gauges: max rel "
             "change " + fmt(worst, 3) + " (< 1e-9); " + fmt(t, 3) + " s (< 300 s)";
  data["max_rel"] = worst;
  o.data = data;
  return o;
}

Outcome localization(Context& ctx) {
  using namespace direct;
  ensure_campaign(ctx);
  const auto& v = *ctx.campaign;
  bool decay = true;
  std::ostringstream alphas;
  for (const auto& r : v.runs) {
    const double a = r.localization.entries.front().alpha_hat;
    decay = decay && a > 0;
    alphas << fmt(a, 4) << ' ';
  }

  BoxProblem neg;
  neg.h = 1.0;
  neg.L1 = neg.L2 = 1.0;
  neg.T = 1.0;
  neg.n1 = neg.n2 = 16;
  neg.n3 = 8;
  neg.bottom = BottomCondition::Dirichlet;
  const auto nrep = solve_lowest(neg, 1, linalg::EigenOptions{});
  const LocalizationReport nloc = localization_diagnostics(nrep, neg, {0.0, 0.0});
  const bool control = !nloc.entries.front().localized;

  Outcome o;
  o.pass = decay && v.sigma_ratio <= 3.0 && control;
  o.detail = "ground-state alpha_hat per h: " + alphas.str() + "(all > 0); sigma^2/h^(1/4) max/min " +
             fmt(v.sigma_ratio, 4) + " (<= 3); A = 0 Dirichlet control localized: " +
             (nloc.entries.front().localized ? "yes" : "no") + " (spread ratio " +
             fmt(nloc.entries.front().spread_ratio, 3) + ")";
  o.data = {{"sigma_ratio", v.sigma_ratio}, {"control_spread", nloc.entries.front().spread_ratio}};
  return o;
}

Outcome oracle_equivalence(Context&) {
  Stopwatch clock;
  std::vector<std::pair<std::string, linalg::CsrMatrix>> cases;
  std::mt19937_64 rng(7);
  for (linalg::Index n : {12, 40, 90, 150, 200}) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::uniform_int_distribution<linalg::Index> col(0, n - 1);
    linalg::TripletBuilder b(n, n);
    for (linalg::Index i = 0; i < n; ++i) {
      b.add(i, i, 4.0 * u(rng));
      for (int k = 0; k < 3; ++k) {
        const linalg::Index j = col(rng);
        if (j == i) continue;
        const linalg::Complex z{u(rng), u(rng)};
        b.add(i, j, z);
        b.add(j, i, std::conj(z));
      }
    }
    cases.emplace_back("random n=" + std::to_string(n), b.build(true));
  }
  model::HalfPlaneGrid g;
  g.s_min = -4;
  g.s_max = 4;
  g.t_max = 5;
  g.n_s = 14;
  g.n_t = 12;
  cases.emplace_back("lupan 14x12", model::lupan_matrix(kPi / 4, g));
  direct::BoxProblem box;
  box.h = 1.0;
  box.L1 = 0.5;
  box.L2 = 0.6;
  box.T = 0.5;
  box.n1 = 6;
  box.n2 = 8;
  box.n3 = 4;
  box.field = geometry::flat_quadratic_field(kPi / 3);
  cases.emplace_back("box 5x7x4", direct::assemble(box));

  double worst = 0.0;
  std::size_t solves = 0;
  for (const auto& [name, a] : cases) {
    Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(a.nrows(), a.ncols());
    const auto off = a.row_offsets();
    const auto cols = a.col_indices();
    const auto vals = a.values();
    for (linalg::Index i = 0; i < a.nrows(); ++i)
      for (linalg::Index p = off[i]; p < off[i + 1]; ++p) d(i, cols[p]) = vals[p];
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> dense(d, Eigen::EigenvaluesOnly);
    for (auto strategy : {linalg::EigenStrategy::ShiftInvertLanczos, linalg::EigenStrategy::Lobpcg}) {
      linalg::EigenOptions o;
      o.k = 4;
      o.tol = 1e-12;
      o.inner_tol = 1e-14;
      o.strategy = strategy;
      const auto rep = linalg::smallest_eigenpairs(a, o);
      ++solves;
      for (std::size_t k = 0; k < o.k; ++k)
        worst = std::max(worst, std::abs(rep.eigenvalues[k] - dense.eigenvalues()(static_cast<Eigen::Index>(k))) /
                                    std::max(1.0, std::abs(dense.eigenvalues()(static_cast<Eigen::Index>(k)))));
    }
  }
  const double t = clock.seconds();
  Outcome o;
  o.pass = worst < 1e-9;
  o.detail = std::to_string(solves) + " sparse solves (both strategies, k = 4) on " + std::to_string(cases.size()) +
             " matrices up to 200 x 200: max deviation from dense " + fmt(worst, 3) + " (< 1e-9, relative to max(1, |lambda|)); " +
             fmt(t, 3) + " s";
  o.data = {{"max_deviation", worst}, {"solves", solves}};
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria for the magspec toolkit"};
  std::string only, out = "acceptance_out";
  app.add_option("--only", only, "comma-separated criterion numbers");
  app.add_option("--out", out, "directory for artifacts and acceptance.json");
  CLI11_PARSE(app, argc, argv);

  std::set<int> selected;
  if (!only.empty())
    for (double v : io::parse_real_list(only)) selected.insert(static_cast<int>(v));

  Context ctx;
  ctx.out = out;
  fs::create_directories(ctx.out);

  const std::vector<std::tuple<int, std::string, std::function<Outcome(Context&)>>> criteria{
      {1, "Theta0 reproduction", theta0_reproduction},
      {2, "band-curve properties", band_curve},
      {3, "model operator", model_operator},
      {4, "geometry invariants", geometry_invariants},
      {5, "leading-order validation", leading_order},
      {6, "gap scaling", gap_scaling},
      {7, "gauge invariance", gauge_invariance},
      {8, "localization diagnostics", localization},
      {9, "oracle equivalence", oracle_equivalence},
  };

  nlohmann::json report = {{"schema", kSchemaVersion}, {"criteria", nlohmann::json::array()}};
  int unexpected = 0;
  for (const auto& [id, name, run] : criteria) {
    if (!selected.empty() && !selected.count(id)) continue;
    Outcome o;
    try {
      o = run(ctx);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("error: ") + e.what();
    }
    const bool known = kKnownUnattainable.count(id) > 0;
    std::string line = std::string(o.pass ? "PASS" : "FAIL") + " [" + std::to_string(id) + "] " + name + ": " + o.detail;
    if (!o.pass && known) line += "  [known unattainable, see README]";
    if (o.pass && known) line += "  [listed as unattainable but passed]";
    std::cout << line << std::endl;
    if (!o.pass && !known) ++unexpected;
    report["criteria"].push_back(
        {{"id", id}, {"name", name}, {"pass", o.pass}, {"known_unattainable", known}, {"detail", o.detail}, {"data", o.data}});
  }
  std::ofstream(ctx.out / "acceptance.json") << report.dump(2) << '\n';
  std::cout << (unexpected ? "acceptance: " + std::to_string(unexpected) + " unexpected failure(s)"
                           : std::string("acceptance: no unexpected failures"))
            << std::endl;
  return unexpected ? 1 : 0;
}
