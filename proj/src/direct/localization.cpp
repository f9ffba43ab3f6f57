#include "magspec/direct/localization.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

namespace magspec::direct {

namespace {

struct LineFit {
  double slope = 0.0, r2 = 0.0;
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  LineFit out;
  const double n = static_cast<double>(x.size());
  if (x.size() < 2) return out;
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) mx += x[i] / n, my += y[i] / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0) return out;
  out.slope = sxy / sxx;
  out.r2 = syy > 0 ? sxy * sxy / (sxx * syy) : 1.0;
  return out;
}

}  // namespace

nlohmann::json LocalizationReport::to_json() const {
  nlohmann::json j;
  j["h"] = h;
  j["x0"] = {x0.x(), x0.y()};
  auto& arr = j["entries"] = nlohmann::json::array();
  for (const auto& e : entries)
    arr.push_back({{"eigenvalue", e.eigenvalue},
                   {"alpha_hat", e.alpha_hat},
                   {"alpha_fit_r2", e.alpha_fit_r2},
                   {"mass_total", e.mass_total},
                   {"mass_defect", e.mass_defect},
                   {"sigma2", e.sigma2},
                   {"sigma2_over_h14", e.sigma2_over_h14},
                   {"sigma2_over_h", e.sigma2_over_h},
                   {"spread_ratio", e.spread_ratio},
                   {"centroid", {e.centroid.x(), e.centroid.y()}},
                   {"wall_mass", e.wall_mass},
                   {"bottom_mass", e.bottom_mass},
                   {"localized", e.localized}});
  return j;
}

LocalizationReport localization_diagnostics(const linalg::EigenReport& report, const BoxProblem& p,
                                            const Eigen::Vector2d& x0) {
  LocalizationReport out;
  out.h = p.h;
  out.x0 = x0;
  const double sqrt_h = std::sqrt(p.h);
  for (std::size_t m = 0; m < report.eigenvectors.size(); ++m) {
    const auto& psi = report.eigenvectors[m];
    if (psi.size() != p.unknowns()) throw std::invalid_argument("localization_diagnostics: eigenvector size mismatch");
    LocalizationEntry e;
    e.eigenvalue = m < report.eigenvalues.size() ? report.eigenvalues[m] : std::nan("");
    e.layer_mass.assign(p.n3, 0.0);
    double norm2 = 0.0, mxx = 0.0, mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < p.nx(); ++i)
      for (std::size_t j = 0; j < p.ny(); ++j) {
        const double dx = p.x(i) - x0.x(), dy = p.y(j) - x0.y();
        for (std::size_t k = 0; k < p.n3; ++k) {
          const double w = std::norm(psi[p.index(i, j, k)]);
          e.layer_mass[k] += w;
          norm2 += w;
          mxx += w * (dx * dx + dy * dy);
          mx += w * p.x(i);
          my += w * p.y(j);
        }
      }
    for (double v : e.layer_mass) e.mass_total += v;
    e.mass_defect = std::abs(e.mass_total - norm2);
    e.sigma2 = mxx / norm2;
    e.sigma2_over_h14 = e.sigma2 / std::pow(p.h, 0.25);
    e.sigma2_over_h = e.sigma2 / p.h;
    e.spread_ratio = e.sigma2 / (p.L1 * p.L1 + p.L2 * p.L2);
    e.centroid = {mx / norm2, my / norm2};

    // Decay fit from the peak down to where the profile reaches rounding level.
    const auto peak = std::max_element(e.layer_mass.begin(), e.layer_mass.end()) - e.layer_mass.begin();
    const double top = e.layer_mass[peak];
    std::vector<double> xs, ys;
    for (std::size_t k = peak; k < p.n3; ++k) {
      if (e.layer_mass[k] <= 1e-14 * top) break;
      xs.push_back(p.t(k) / sqrt_h);
      ys.push_back(std::log(e.layer_mass[k]));
    }
    const LineFit lf = fit_line(xs, ys);
    e.alpha_hat = -0.5 * lf.slope;
    e.alpha_fit_r2 = lf.r2;
    e.wall_mass = wall_mass(p, psi);
    e.bottom_mass = bottom_mass(p, psi);
    e.localized = e.alpha_hat > 0 && e.wall_mass <= kWallMassLimit && e.spread_ratio < kSpreadRatioLimit;
    out.entries.push_back(std::move(e));
  }
  return out;
}

}  // namespace magspec::direct
