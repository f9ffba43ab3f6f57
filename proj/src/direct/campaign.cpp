#include "magspec/direct/campaign.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include "magspec/error.hpp"
#include "magspec/parallel.hpp"

namespace magspec::direct {

void ValidationTable::write_csv(std::ostream& os) const {
  os << "h,n,lambda,lambda_over_h,residual,wall_mass,alpha_hat,sigma2\n";
  const auto old = os.precision(15);
  for (const auto& r : runs)
    for (std::size_t n = 0; n < r.eigenvalues.size(); ++n) {
      const auto& e = r.localization.entries[n];
      os << r.h << ',' << n + 1 << ',' << r.eigenvalues[n] << ',' << r.eigenvalues[n] / r.h << ',' << r.residuals[n]
         << ',' << e.wall_mass << ',' << e.alpha_hat << ',' << e.sigma2 << '\n';
    }
  os.precision(old);
}

nlohmann::json ValidationTable::to_json() const {
  nlohmann::json j;
  auto& rs = j["runs"] = nlohmann::json::array();
  for (const auto& r : runs)
    rs.push_back({{"h", r.h},
                  {"box", r.box},
                  {"unknowns", r.unknowns},
                  {"eigenvalues", r.eigenvalues},
                  {"residuals", r.residuals},
                  {"iterations", r.iterations},
                  {"inner_iterations", r.inner_iterations},
                  {"seconds", r.seconds},
                  {"localization", r.localization.to_json()}});
  j["predicted"] = {{"beta_min", beta_min_predicted}, {"d0", d0_predicted}};
  j["fit"] = fit ? fit->to_json() : nlohmann::json(nullptr);
  j["comparison"] = {{"leading_coefficient", leading_coefficient},
                     {"leading_rel_error", leading_rel_error},
                     {"gap_exponent", gap_exponent},
                     {"gap_coeff_fitted", gap_coeff_fitted},
                     {"gap_rel_error", gap_rel_error},
                     {"sigma2_over_h14_ratio", sigma_ratio},
                     {"all_localized", all_localized}};
  return j;
}

ValidationTable toy_validation(const beta::BetaMinimum& bm, const geometry::MagneticField& field,
                               const CampaignOptions& options) {
  if (!bm.verdicts.hessian_spd || !bm.verdicts.beta_below_b_min || !bm.verdicts.theta_interior)
    throw AssumptionError("toy_validation: the beta analysis does not certify a non-degenerate minimum with "
                          "beta_min < b_min");
  if (std::abs(bm.x0.z()) > 1e-9)
    throw ConfigError("toy_validation: the direct solver only handles the flat boundary z = 0");
  if (options.h_list.empty() || options.levels < 1) throw ConfigError("toy_validation: empty campaign");

  std::vector<double> hs = options.h_list;
  std::sort(hs.begin(), hs.end());
  const Eigen::Vector2d centre(bm.x0.x(), bm.x0.y());

  ValidationTable table;
  table.beta_min_predicted = bm.beta_min;
  table.d0_predicted = bm.d0;
  table.runs.resize(hs.size());
  parallel_for(hs.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t m = b; m < e; ++m) {
      const double h = hs[m];
      const auto t0 = std::chrono::steady_clock::now();
      const BoxProblem problem = scaled_box(h, field, centre, options.rule);
      linalg::EigenOptions eo;
      eo.tol = options.tol;
      const linalg::EigenReport rep =
          solve_lowest(problem, options.levels, eo, options.shift_fraction * h * bm.beta_min);
      CampaignRun& run = table.runs[m];
      run.h = h;
      run.box = problem.to_json();
      run.unknowns = problem.unknowns();
      run.eigenvalues = rep.eigenvalues;
      run.residuals = rep.residual_norms;
      run.iterations = rep.iterations;
      run.inner_iterations = rep.inner_iterations;
      run.localization = localization_diagnostics(rep, problem, centre);
      run.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      if (!options.slice_dir.empty()) {
        std::filesystem::create_directories(options.slice_dir);
        for (std::size_t n = 0; n < rep.eigenvectors.size(); ++n) {
          std::ostringstream name;
          name << "slice_h" << h << "_n" << n + 1 << ".txt";
          std::ofstream out(std::filesystem::path(options.slice_dir) / name.str());
          write_slice(out, problem, rep.eigenvectors[n]);
        }
      }
      if (options.enforce_wall_mass)
        for (std::size_t n = 0; n < run.localization.entries.size(); ++n)
          if (run.localization.entries[n].wall_mass > kWallMassLimit) {
            std::ostringstream os;
            os << "toy_validation: level " << n + 1 << " at h = " << h << " has wall mass "
               << run.localization.entries[n].wall_mass << " > 1e-4; enlarge the box (lateral factor "
               << options.rule.lateral << ")";
            throw BoxTooSmallError(os.str());
          }
    }
  }, 1);

  std::vector<beta::SpectralSample> samples;
  for (const auto& r : table.runs)
    for (std::size_t n = 0; n < r.eigenvalues.size(); ++n)
      samples.push_back({r.h, static_cast<int>(n + 1), r.eigenvalues[n]});
  if (hs.size() >= 3) {
    table.fit = beta::fit_expansion(samples);
    table.leading_coefficient = table.fit->beta_min;
    table.leading_rel_error = std::abs(table.leading_coefficient - bm.beta_min) / bm.beta_min;
    table.gap_coeff_fitted = table.fit->gap_coeff;
    table.gap_rel_error = std::abs(table.gap_coeff_fitted - bm.d0) / bm.d0;
  }
  if (options.levels >= 2 && hs.size() >= 2) {
    std::vector<double> gaps;
    for (const auto& r : table.runs) gaps.push_back(r.eigenvalues[1] - r.eigenvalues[0]);
    table.gap_exponent = beta::power_law_exponent(hs, gaps);
  }
  double lo = INFINITY, hi = 0.0;
  table.all_localized = true;
  for (const auto& r : table.runs) {
    const double v = r.localization.entries.front().sigma2_over_h14;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    table.all_localized = table.all_localized && r.localization.entries.front().localized;
  }
  table.sigma_ratio = hi / lo;
  return table;
}

}  // namespace magspec::direct
