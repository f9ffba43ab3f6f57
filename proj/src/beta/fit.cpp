#include "magspec/beta/fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include <Eigen/Dense>

#include "magspec/error.hpp"

namespace magspec::beta {

namespace {

struct LeastSquares {
  Eigen::VectorXd coef;
  Eigen::MatrixXd covariance;
  Eigen::VectorXd residual;  // unweighted
  double condition = 0.0;
  std::size_t dof = 0;
};

// Weighted least squares with column equilibration. The covariance is the
// usual sigma^2 (X^T W X)^{-1} with sigma^2 from the residual; it is zero when
// the fit has no spare degrees of freedom.
LeastSquares weighted_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& w,
                          const char* what) {
  const Eigen::Index m = x.rows(), p = x.cols();
  if (m < p) {
    std::ostringstream os;
    os << what << ": " << m << " samples cannot determine " << p << " coefficients";
    throw ConfigError(os.str());
  }
  const Eigen::VectorXd sw = w.cwiseSqrt();
  Eigen::MatrixXd a = sw.asDiagonal() * x;
  Eigen::VectorXd scale = a.colwise().norm().transpose();
  for (Eigen::Index k = 0; k < p; ++k)
    if (scale(k) == 0) scale(k) = 1;
  a = a * scale.cwiseInverse().asDiagonal();

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  LeastSquares out;
  out.condition = sv(p - 1) > 0 ? sv(0) / sv(p - 1) : std::numeric_limits<double>::infinity();
  if (out.condition > 1e8) {
    std::ostringstream os;
    os.precision(3);
    os << what << ": design matrix is ill-conditioned (condition number " << out.condition
       << " > 1e8); use a wider range of h values";
    throw ConfigError(os.str());
  }
  const Eigen::VectorXd z = svd.solve(sw.cwiseProduct(y));
  out.coef = z.cwiseQuotient(scale);
  out.residual = x * out.coef - y;
  out.dof = static_cast<std::size_t>(m - p);

  const Eigen::MatrixXd vs = svd.matrixV() * sv.cwiseInverse().asDiagonal();
  Eigen::MatrixXd cov = scale.cwiseInverse().asDiagonal() * (vs * vs.transpose()) * scale.cwiseInverse().asDiagonal();
  const double sigma2 = out.dof > 0 ? out.residual.cwiseProduct(w).dot(out.residual) / out.dof : 0.0;
  out.covariance = sigma2 * cov;
  return out;
}

double stderr_of(const Eigen::MatrixXd& cov, Eigen::Index k) { return std::sqrt(std::max(0.0, cov(k, k))); }

}  // namespace

double ExpansionFit::lambda(double h, int n) const {
  auto it = c_terms.find(n);
  const double cn = it != c_terms.end() ? it->second : gap_coeff * (n - 0.5) + c1;
  return h * (beta_min + c0 * std::sqrt(h) + cn * h);
}

nlohmann::json ExpansionFit::to_json() const {
  nlohmann::json j;
  j["beta_min"] = {{"value", beta_min}, {"stderr", beta_min_stderr}};
  j["C0"] = {{"value", c0}, {"stderr", c0_stderr}};
  j["gap_coeff"] = {{"value", gap_coeff}, {"stderr", gap_stderr}, {"sqrt_h_slope", gap_slope}};
  j["C1"] = c1;
  auto& terms = j["c_terms"] = nlohmann::json::array();
  for (const auto& [n, v] : c_terms) terms.push_back({{"n", n}, {"value", v}, {"stderr", c_terms_stderr.at(n)}});
  auto& cov = j["covariance"] = nlohmann::json::array();
  for (Eigen::Index i = 0; i < covariance.rows(); ++i) {
    std::vector<double> row(covariance.cols());
    for (Eigen::Index k = 0; k < covariance.cols(); ++k) row[k] = covariance(i, k);
    cov.push_back(row);
  }
  j["covariance_order"] = "beta_min, C0, c_n for ascending n";
  j["max_residual"] = max_residual;
  j["condition"] = condition;
  j["degrees_of_freedom"] = degrees_of_freedom;
  return j;
}

ExpansionFit fit_expansion(const std::vector<SpectralSample>& samples) {
  if (samples.empty()) throw ConfigError("fit_expansion: no samples");
  std::map<int, std::set<double>> h_by_n;
  double h_lo = std::numeric_limits<double>::infinity(), h_hi = 0.0;
  for (const auto& s : samples) {
    if (!(s.h > 0) || !std::isfinite(s.h) || !std::isfinite(s.lambda) || !(s.weight > 0) || s.n < 1)
      throw ConfigError("fit_expansion: samples need h > 0, n >= 1, finite lambda and positive weight");
    if (!h_by_n[s.n].insert(s.h).second) throw ConfigError("fit_expansion: duplicate (h, n) sample");
    h_lo = std::min(h_lo, s.h);
    h_hi = std::max(h_hi, s.h);
  }
  for (const auto& [n, hs] : h_by_n)
    if (hs.size() < 3)
      throw ConfigError("fit_expansion: level n = " + std::to_string(n) + " has fewer than 3 distinct h values");
  if (h_hi > 10.0 * h_lo * (1 + 1e-12))
    throw ConfigError("fit_expansion: h values must lie within one decade");

  std::vector<int> levels;
  for (const auto& [n, hs] : h_by_n) levels.push_back(n);
  const Eigen::Index m = static_cast<Eigen::Index>(samples.size());
  const Eigen::Index p = 2 + static_cast<Eigen::Index>(levels.size());
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(m, p);
  Eigen::VectorXd y(m), w(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto& s = samples[i];
    x(i, 0) = 1.0;
    x(i, 1) = std::sqrt(s.h);
    const auto pos = std::find(levels.begin(), levels.end(), s.n) - levels.begin();
    x(i, 2 + pos) = s.h;
    y(i) = s.lambda / s.h;
    w(i) = s.weight;
  }
  const LeastSquares ls = weighted_fit(x, y, w, "fit_expansion");

  ExpansionFit fit;
  fit.beta_min = ls.coef(0);
  fit.c0 = ls.coef(1);
  fit.beta_min_stderr = stderr_of(ls.covariance, 0);
  fit.c0_stderr = stderr_of(ls.covariance, 1);
  for (std::size_t k = 0; k < levels.size(); ++k) {
    fit.c_terms[levels[k]] = ls.coef(2 + k);
    fit.c_terms_stderr[levels[k]] = stderr_of(ls.covariance, 2 + k);
  }
  fit.covariance = ls.covariance;
  fit.condition = ls.condition;
  fit.degrees_of_freedom = ls.dof;
  fit.max_residual = ls.residual.cwiseAbs().maxCoeff();

  // Gap from consecutive levels at a common h.
  std::map<std::pair<int, double>, const SpectralSample*> index;
  for (const auto& s : samples) index[{s.n, s.h}] = &s;
  std::vector<double> gh, gy, gw;
  for (const auto& s : samples) {
    auto it = index.find({s.n + 1, s.h});
    if (it == index.end()) continue;
    gh.push_back(s.h);
    gy.push_back((it->second->lambda - s.lambda) / (s.h * s.h));
    gw.push_back(std::min(s.weight, it->second->weight));
  }
  if (gh.empty()) {
    fit.gap_coeff = fit.gap_stderr = fit.c1 = std::numeric_limits<double>::quiet_NaN();
    return fit;
  }
  const std::set<double> gap_h(gh.begin(), gh.end());
  const Eigen::Index q = gap_h.size() >= 3 ? 2 : 1;
  Eigen::MatrixXd gx(gh.size(), q);
  for (std::size_t i = 0; i < gh.size(); ++i) {
    gx(i, 0) = 1.0;
    if (q == 2) gx(i, 1) = std::sqrt(gh[i]);
  }
  const LeastSquares gl = weighted_fit(gx, Eigen::Map<Eigen::VectorXd>(gy.data(), gy.size()),
                                       Eigen::Map<Eigen::VectorXd>(gw.data(), gw.size()), "fit_expansion (gap)");
  fit.gap_coeff = gl.coef(0);
  fit.gap_slope = q == 2 ? gl.coef(1) : 0.0;
  fit.gap_stderr = stderr_of(gl.covariance, 0);

  double c1 = 0.0;
  for (const auto& [n, cn] : fit.c_terms) c1 += cn - fit.gap_coeff * (n - 0.5);
  fit.c1 = c1 / static_cast<double>(fit.c_terms.size());
  return fit;
}

double power_law_exponent(const std::vector<double>& h, const std::vector<double>& y) {
  if (h.size() != y.size() || h.size() < 2) throw std::invalid_argument("power_law_exponent: need >= 2 matched points");
  double mx = 0, my = 0;
  const double n = static_cast<double>(h.size());
  for (std::size_t i = 0; i < h.size(); ++i) {
    if (!(h[i] > 0) || !(y[i] > 0)) throw std::invalid_argument("power_law_exponent: values must be positive");
    mx += std::log(h[i]) / n;
    my += std::log(y[i]) / n;
  }
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    const double dx = std::log(h[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  if (sxx == 0) throw std::invalid_argument("power_law_exponent: h values must differ");
  return sxy / sxx;
}

}  // namespace magspec::beta
