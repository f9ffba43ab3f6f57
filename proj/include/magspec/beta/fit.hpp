#pragma once

#include <map>
#include <vector>

#include <Eigen/Core>

#include "json.hpp"

namespace magspec::beta {

struct SpectralSample {
  double h = 0.0;
  int n = 1;
  double lambda = 0.0;
  double weight = 1.0;
};

/// Regression of lambda / h on {1, h^{1/2}, h 1[n = m]} over all samples:
///   lambda_n / h = beta + C0 h^{1/2} + c_n h,  c_n = gap (n - 1/2) + C1.
/// The gap coefficient is fitted separately from (lambda_{n+1} - lambda_n) / h^2
/// on {1, h^{1/2}} (just {1} with fewer than three h values), and C1 is the
/// mean of c_n - gap (n - 1/2).
struct ExpansionFit {
  double beta_min = 0.0, beta_min_stderr = 0.0;
  double c0 = 0.0, c0_stderr = 0.0;
  std::map<int, double> c_terms, c_terms_stderr;
  double gap_coeff = 0.0, gap_stderr = 0.0;
  double gap_slope = 0.0;  // coefficient of h^{1/2} in the gap fit
  double c1 = 0.0;
  Eigen::MatrixXd covariance;  // of (beta, C0, c_n...) in that order
  double max_residual = 0.0;   // max |lambda_fit - lambda| / h
  double condition = 0.0;      // of the column-scaled design matrix
  std::size_t degrees_of_freedom = 0;

  double lambda(double h, int n) const;
  nlohmann::json to_json() const;
};

/// Requires at least three distinct h per level, all h within one decade;
/// ConfigError otherwise, and when the design condition number exceeds 1e8.
ExpansionFit fit_expansion(const std::vector<SpectralSample>& samples);

/// Least-squares slope of log(y) on log(h).
double power_law_exponent(const std::vector<double>& h, const std::vector<double>& y);

}  // namespace magspec::beta
