#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "magspec/beta/beta_minimum.hpp"
#include "magspec/beta/fit.hpp"
#include "magspec/direct/box_problem.hpp"
#include "magspec/direct/localization.hpp"

namespace magspec::direct {

struct CampaignOptions {
  std::vector<double> h_list{0.1, 0.07, 0.05};
  std::size_t levels = 2;
  BoxRule rule{7.0, 7.0, 6.0};
  double tol = 1e-8;
  /// Shift-invert lower bound sigma = shift_fraction * h * beta_min.
  double shift_fraction = 0.7;
  /// Raise BoxTooSmallError when a level puts more than 1e-4 of its mass near the walls.
  bool enforce_wall_mass = true;
  /// When non-empty, t = 0 slices of every eigenfunction are written there.
  std::string slice_dir;
};

struct CampaignRun {
  double h = 0.0;
  nlohmann::json box;
  std::size_t unknowns = 0;
  std::vector<double> eigenvalues, residuals;
  std::size_t iterations = 0, inner_iterations = 0;
  double seconds = 0.0;
  LocalizationReport localization;
};

struct ValidationTable {
  std::vector<CampaignRun> runs;  // ascending h
  double beta_min_predicted = 0.0;
  double d0_predicted = 0.0;
  std::optional<beta::ExpansionFit> fit;
  double leading_coefficient = 0.0;  // fitted beta_min
  double leading_rel_error = 0.0;
  double gap_exponent = 0.0;          // slope of log(lambda2 - lambda1) against log h
  double gap_coeff_fitted = 0.0;
  double gap_rel_error = 0.0;
  double sigma_ratio = 0.0;  // max / min of the ground-state sigma^2 / h^{1/4}
  bool all_localized = false;

  /// Columns h,n,lambda,lambda_over_h,residual,wall_mass,alpha_hat,sigma2.
  void write_csv(std::ostream& os) const;
  nlohmann::json to_json() const;
};

/// Direct-solver campaign on the flat boundary around the beta minimizer,
/// followed by fit_expansion. Runs for distinct h execute concurrently.
/// AssumptionError when bm does not certify the hypotheses, ConfigError when
/// the minimizer is not on the flat boundary z = 0, BoxTooSmallError from the
/// wall-mass check.
ValidationTable toy_validation(const beta::BetaMinimum& bm, const geometry::MagneticField& field,
                               const CampaignOptions& options = {});

}  // namespace magspec::direct
