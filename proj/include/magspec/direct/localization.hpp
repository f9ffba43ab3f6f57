#pragma once

#include <vector>

#include <Eigen/Core>

#include "json.hpp"
#include "magspec/direct/box_problem.hpp"
#include "magspec/linalg/eigensolver.hpp"

namespace magspec::direct {

struct LocalizationEntry {
  double eigenvalue = 0.0;
  /// Normal decay: least-squares fit of log m(t) = c - 2 alpha t / sqrt(h)
  /// beyond the peak of the layer masses m(t).
  double alpha_hat = 0.0;
  double alpha_fit_r2 = 0.0;
  std::vector<double> layer_mass;
  double mass_total = 0.0;   // sum of layer masses
  double mass_defect = 0.0;  // |mass_total - ||psi||^2|
  /// Tangential second moment about x0 and its two candidate scalings.
  double sigma2 = 0.0;
  double sigma2_over_h14 = 0.0;
  double sigma2_over_h = 0.0;
  /// sigma2 / (L1^2 + L2^2): about 0.13 for a state filling the box.
  double spread_ratio = 0.0;
  Eigen::Vector2d centroid = Eigen::Vector2d::Zero();
  double wall_mass = 0.0;
  double bottom_mass = 0.0;
  bool localized = false;
};

struct LocalizationReport {
  double h = 0.0;
  Eigen::Vector2d x0 = Eigen::Vector2d::Zero();
  std::vector<LocalizationEntry> entries;
  nlohmann::json to_json() const;
};

inline constexpr double kWallMassLimit = 1e-4;
inline constexpr double kSpreadRatioLimit = 0.1;

/// Moments are taken about x0 from the beta analysis, not about the
/// eigenfunction's own centroid. A state counts as localized when
/// alpha_hat > 0, wall_mass <= 1e-4 and spread_ratio < 0.1 (a box-filling
/// sine mode has about 0.13); anything else is
/// flagged, never fatal.
LocalizationReport localization_diagnostics(const linalg::EigenReport& report, const BoxProblem& problem,
                                            const Eigen::Vector2d& x0);

}  // namespace magspec::direct
