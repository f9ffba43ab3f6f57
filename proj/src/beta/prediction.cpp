#include "magspec/beta/prediction.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

namespace magspec::beta {

Prediction predict_spectrum(double beta_min, double gap_coeff, const std::vector<double>& h_list, int n_max,
                            std::optional<FittedConstants> fitted) {
  if (n_max < 1) throw std::invalid_argument("predict_spectrum: n_max must be at least 1");
  for (double h : h_list)
    if (!(h >= 0) || !std::isfinite(h)) throw std::invalid_argument("predict_spectrum: h values must be >= 0");

  Prediction p;
  p.h_list = h_list;
  for (int n = 1; n <= n_max; ++n) p.n_list.push_back(n);
  p.mode = fitted ? "fitted" : "known-terms";
  p.beta_min = beta_min;
  p.gap_coeff = gap_coeff;
  p.fitted = fitted;
  const double c0 = fitted ? fitted->c0 : 0.0;
  const double c1 = fitted ? fitted->c1 : 0.0;
  for (double h : h_list)
    for (int n : p.n_list) {
      const double value = beta_min * h + c0 * h * std::sqrt(h) + (gap_coeff * (n - 0.5) + c1) * h * h;
      p.rows.push_back({h, n, value});
    }
  return p;
}

Prediction predict_spectrum(const BetaMinimum& bm, const std::vector<double>& h_list, int n_max,
                            std::optional<FittedConstants> fitted) {
  return predict_spectrum(bm.beta_min, bm.gap_coeff, h_list, n_max, fitted);
}

void Prediction::write_csv(std::ostream& os) const {
  os << "h,n,value,mode\n";
  const auto old = os.precision(15);
  for (const auto& r : rows) os << r.h << ',' << r.n << ',' << r.value << ',' << mode << '\n';
  os.precision(old);
}

nlohmann::json Prediction::to_json() const {
  nlohmann::json j;
  j["mode"] = mode;
  j["beta_min"] = beta_min;
  j["gap_coeff"] = gap_coeff;
  j["h_list"] = h_list;
  j["n_list"] = n_list;
  if (fitted)
    j["fitted"] = {{"C0", fitted->c0}, {"C1", fitted->c1}};
  else
    j["fitted"] = nullptr;
  auto& rows_json = j["rows"] = nlohmann::json::array();
  for (const auto& r : rows) rows_json.push_back({{"h", r.h}, {"n", r.n}, {"value", r.value}});
  return j;
}

}  // namespace magspec::beta
