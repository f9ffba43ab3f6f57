#include "magspec/model/band_curve.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "magspec/error.hpp"
#include "magspec/log.hpp"
#include "magspec/model/degennes.hpp"
#include "magspec/parallel.hpp"
#include "magspec/schema.hpp"

namespace magspec::model {

namespace {
constexpr double kHalfPi = std::numbers::pi / 2;
}

BandCurve::BandCurve(std::vector<BandSample> samples, double theta0_value, nlohmann::json provenance)
    : samples_(std::move(samples)), theta0_(theta0_value), provenance_(std::move(provenance)) {
  if (samples_.empty()) throw std::invalid_argument("BandCurve: no samples");
  kx_.push_back(0.0);
  ky_.push_back(theta0_);
  for (std::size_t k = 0; k < samples_.size(); ++k) {
    const auto& s = samples_[k];
    if (!(s.theta > 0.0 && s.theta < kHalfPi)) throw std::invalid_argument("BandCurve: sample theta outside (0, pi/2)");
    if (k > 0 && !(s.theta > samples_[k - 1].theta)) throw std::invalid_argument("BandCurve: thetas must increase");
    kx_.push_back(s.theta);
    ky_.push_back(s.energy);
  }
  kx_.push_back(kHalfPi);
  ky_.push_back(1.0);
  for (std::size_t k = 1; k < ky_.size(); ++k)
    if (ky_[k] < ky_[k - 1] - 1e-6) {
      std::ostringstream os;
      os << "BandCurve: energies not increasing between theta = " << kx_[k - 1] << " (" << ky_[k - 1]
         << ") and theta = " << kx_[k] << " (" << ky_[k] << ")";
      throw SolverError(os.str());
    }

  // Fritsch-Carlson slopes.
  const std::size_t n = kx_.size();
  std::vector<double> delta(n - 1);
  for (std::size_t k = 0; k + 1 < n; ++k) delta[k] = (ky_[k + 1] - ky_[k]) / (kx_[k + 1] - kx_[k]);
  km_.assign(n, 0.0);
  km_[0] = delta[0];
  km_[n - 1] = delta[n - 2];
  for (std::size_t k = 1; k + 1 < n; ++k)
    km_[k] = delta[k - 1] * delta[k] <= 0.0 ? 0.0 : 0.5 * (delta[k - 1] + delta[k]);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (delta[k] <= 0.0) {
      km_[k] = km_[k + 1] = 0.0;
      continue;
    }
    const double a = km_[k] / delta[k], b = km_[k + 1] / delta[k];
    const double r = a * a + b * b;
    if (r > 9.0) {
      const double tau = 3.0 / std::sqrt(r);
      km_[k] = tau * a * delta[k];
      km_[k + 1] = tau * b * delta[k];
    }
  }
}

std::size_t BandCurve::interval(double x) const {
  const auto it = std::upper_bound(kx_.begin(), kx_.end(), x);
  const auto k = static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, it - kx_.begin() - 1));
  return std::min(k, kx_.size() - 2);
}

bool BandCurve::in_sampled_range(double theta) const {
  const double x = std::abs(theta);
  return x >= samples_.front().theta && x <= samples_.back().theta;
}

double BandCurve::evaluate(double theta) const {
  if (kx_.empty()) throw std::logic_error("BandCurve: empty curve");
  double x = std::abs(theta);
  if (!in_sampled_range(x) && !warned_->exchange(true)) {
    std::ostringstream os;
    os << "band curve queried at theta = " << theta << " outside the sampled range [" << samples_.front().theta
       << ", " << samples_.back().theta << "]; using the anchor segment towards e(0) = " << theta0_
       << " or e(pi/2) = 1";
    warn(os.str());
  }
  x = std::min(x, kHalfPi);
  const std::size_t k = interval(x);
  const double hk = kx_[k + 1] - kx_[k];
  const double u = (x - kx_[k]) / hk;
  const double h00 = (1 + 2 * u) * (1 - u) * (1 - u), h10 = u * (1 - u) * (1 - u);
  const double h01 = u * u * (3 - 2 * u), h11 = u * u * (u - 1);
  const double v = h00 * ky_[k] + h10 * hk * km_[k] + h01 * ky_[k + 1] + h11 * hk * km_[k + 1];
  return std::clamp(v, theta0_, 1.0);
}

double BandCurve::second_derivative(double theta) const {
  const double x = std::abs(theta);
  if (x > kHalfPi) return 0.0;
  const std::size_t k = interval(x);
  const double hk = kx_[k + 1] - kx_[k];
  const double u = (x - kx_[k]) / hk;
  return (12 * u - 6) * (ky_[k] - ky_[k + 1]) / (hk * hk) + ((6 * u - 4) * km_[k] + (6 * u - 2) * km_[k + 1]) / hk;
}

double BandCurve::derivative(double theta) const {
  const double x = std::abs(theta);
  if (x > kHalfPi) return 0.0;
  const std::size_t k = interval(x);
  const double hk = kx_[k + 1] - kx_[k];
  const double u = (x - kx_[k]) / hk;
  const double d00 = 6 * u * (u - 1), d10 = (1 - u) * (1 - 3 * u);
  const double d01 = -6 * u * (u - 1), d11 = u * (3 * u - 2);
  const double d = (d00 * ky_[k] + d01 * ky_[k + 1]) / hk + d10 * km_[k] + d11 * km_[k + 1];
  return theta < 0.0 ? -d : d;
}

std::vector<double> BandCurve::thetas() const {
  std::vector<double> v;
  for (const auto& s : samples_) v.push_back(s.theta);
  return v;
}

std::vector<double> BandCurve::energies() const {
  std::vector<double> v;
  for (const auto& s : samples_) v.push_back(s.energy);
  return v;
}

std::vector<std::array<double, 4>> BandCurve::coefficients() const {
  std::vector<std::array<double, 4>> c;
  for (std::size_t k = 0; k + 1 < kx_.size(); ++k) {
    const double hk = kx_[k + 1] - kx_[k];
    const double delta = (ky_[k + 1] - ky_[k]) / hk;
    c.push_back({ky_[k], km_[k], (3 * delta - 2 * km_[k] - km_[k + 1]) / hk,
                 (km_[k] + km_[k + 1] - 2 * delta) / (hk * hk)});
  }
  return c;
}

void BandCurve::write_csv(std::ostream& os) const {
  const auto old = os.precision(17);
  os << "theta,energy\n";
  for (const auto& s : samples_) os << s.theta << ',' << s.energy << '\n';
  os.precision(old);
}

nlohmann::json BandCurve::to_json() const {
  nlohmann::json samples = nlohmann::json::array();
  for (const auto& s : samples_)
    samples.push_back({{"theta", s.theta},
                       {"energy", s.energy},
                       {"edge_mass", s.edge_mass},
                       {"unknowns", s.unknowns},
                       {"box",
                        {{"s_min", s.grid.s_min},
                         {"s_max", s.grid.s_max},
                         {"t_max", s.grid.t_max},
                         {"n_s", s.grid.n_s},
                         {"n_t", s.grid.n_t},
                         {"strip_halfwidth", s.grid.strip_halfwidth}}}});
  return {{"schema", kSchemaVersion},
          {"kind", "band_curve"},
          {"theta0", theta0_},
          {"samples", samples},
          {"spline",
           {{"method", "fritsch-carlson"},
            {"knots", kx_},
            {"values", ky_},
            {"slopes", km_},
            {"coefficients", coefficients()}}},
          {"provenance", provenance_}};
}

BandCurve BandCurve::from_json(const nlohmann::json& j) {
  if (j.value("kind", "") != "band_curve") throw ConfigError("band curve JSON: kind is not band_curve");
  if (j.value("schema", 0) != kSchemaVersion)
    throw ConfigError("band curve JSON: unsupported schema " + std::to_string(j.value("schema", 0)));
  std::vector<BandSample> samples;
  for (const auto& s : j.at("samples")) {
    BandSample b;
    b.theta = s.at("theta").get<double>();
    b.energy = s.at("energy").get<double>();
    b.edge_mass = s.value("edge_mass", 0.0);
    b.unknowns = s.value("unknowns", std::size_t{0});
    if (s.contains("box")) {
      const auto& g = s["box"];
      b.grid.s_min = g.at("s_min");
      b.grid.s_max = g.at("s_max");
      b.grid.t_max = g.at("t_max");
      b.grid.n_s = g.at("n_s");
      b.grid.n_t = g.at("n_t");
      b.grid.strip_halfwidth = g.value("strip_halfwidth", 0.0);
    }
    samples.push_back(b);
  }
  return BandCurve(std::move(samples), j.at("theta0").get<double>(), j.value("provenance", nlohmann::json::object()));
}

std::vector<double> default_band_thetas() {
  std::vector<double> t(25);
  for (std::size_t k = 0; k < t.size(); ++k) t[k] = 0.04 + (1.2 - 0.04) * static_cast<double>(k) / 24.0;
  return t;
}

namespace {

void check_thetas(const std::vector<double>& thetas) {
  if (thetas.empty()) throw std::invalid_argument("build_band_curve: empty theta list");
  for (std::size_t k = 0; k < thetas.size(); ++k) {
    if (!(thetas[k] > 0.0 && thetas[k] < kHalfPi))
      throw std::invalid_argument("build_band_curve: theta " + std::to_string(thetas[k]) + " outside (0, pi/2)");
    if (k > 0 && !(thetas[k] > thetas[k - 1])) throw std::invalid_argument("build_band_curve: thetas must be sorted");
  }
}

template <class Solve>
std::vector<BandSample> sample_all(const std::vector<double>& thetas, Solve&& solve) {
  std::vector<BandSample> out(thetas.size());
  parallel_for(
      thetas.size(),
      [&](std::size_t b, std::size_t e) {
        for (std::size_t k = b; k < e; ++k) out[k] = solve(thetas[k]);
      },
      1);
  return out;
}

}  // namespace

BandCurve build_band_curve(const std::vector<double>& thetas, const HalfPlaneGrid& grid, const LuPanOptions& options) {
  check_thetas(thetas);
  auto samples = sample_all(thetas, [&](double th) {
    BandSample s;
    s.theta = th;
    s.energy = lupan_energy(th, grid, options);
    s.grid = grid;
    s.unknowns = lupan_unknowns(th, grid);
    return s;
  });
  const nlohmann::json prov = {{"method", "fixed-grid"},
                               {"edge_mass_limit", options.edge_mass_limit},
                               {"eigen_tol", options.tol},
                               {"theta0_grid", {{"n", 4000}, {"t_max", 20.0}}}};
  return BandCurve(std::move(samples), degennes_minimum().theta0, prov);
}

BandCurve build_band_curve_auto(const std::vector<double>& thetas, const AutoBoxOptions& options) {
  check_thetas(thetas);
  auto samples = sample_all(thetas, [&](double th) {
    const LuPanResult r = lupan_energy_auto(th, options);
    BandSample s;
    s.theta = th;
    s.energy = r.energy;
    s.grid = r.grid;
    s.edge_mass = r.edge_mass.total;
    s.unknowns = r.unknowns;
    return s;
  });
  const nlohmann::json prov = {{"method", "auto-box"},
                               {"ds", options.ds},
                               {"dt", options.dt},
                               {"strip_halfwidth", options.strip_halfwidth},
                               {"edge_mass_limit", options.solve.edge_mass_limit},
                               {"eigen_tol", options.solve.tol},
                               {"theta0_grid", {{"n", 4000}, {"t_max", 20.0}}}};
  return BandCurve(std::move(samples), degennes_minimum().theta0, prov);
}

}  // namespace magspec::model
