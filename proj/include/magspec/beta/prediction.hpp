#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "magspec/beta/beta_minimum.hpp"

namespace magspec::beta {

struct FittedConstants {
  double c0 = 0.0;
  double c1 = 0.0;
};

struct PredictionRow {
  double h = 0.0;
  int n = 0;
  double value = 0.0;
};

/// lambda_n(h) ~ beta_min h + C0 h^{3/2} + (gap (n - 1/2) + C1) h^2.
/// Without fitted constants C0 = C1 = 0 and the mode is "known-terms".
struct Prediction {
  std::vector<double> h_list;
  std::vector<int> n_list;
  std::vector<PredictionRow> rows;  // h-major, n ascending
  std::string mode;
  double beta_min = 0.0;
  double gap_coeff = 0.0;
  std::optional<FittedConstants> fitted;

  /// Columns h,n,value,mode.
  void write_csv(std::ostream& os) const;
  nlohmann::json to_json() const;
};

Prediction predict_spectrum(double beta_min, double gap_coeff, const std::vector<double>& h_list, int n_max,
                            std::optional<FittedConstants> fitted = std::nullopt);
Prediction predict_spectrum(const BetaMinimum& bm, const std::vector<double>& h_list, int n_max,
                            std::optional<FittedConstants> fitted = std::nullopt);

}  // namespace magspec::beta
