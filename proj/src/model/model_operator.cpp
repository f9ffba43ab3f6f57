#include "magspec/model/model_operator.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

#include "magspec/error.hpp"

namespace magspec::model {

namespace {

using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

void check_common(double d0, double h) {
  if (!(d0 > 0.0)) throw std::invalid_argument("model operator: d0 must be > 0");
  if (!(h > 0.0)) throw std::invalid_argument("model operator: h must be > 0");
}

cdouble shift_constant(double d0, cdouble alpha, cdouble beta, double h, ShiftConvention c) {
  const double factor = c == ShiftConvention::Exact ? 0.5 : 1.0;
  return -factor * (alpha * alpha + beta * beta) * h / d0;
}

struct Discretization {
  std::size_t n = 0;
  double window = 0.0;
  Eigen::VectorXd u;
  Mat dft;  // dft(m, j) = exp(-i k_m u_j) / sqrt(n)
  Mat op;
};

Discretization discretize(double d0, cdouble alpha, cdouble beta, double h, std::size_t n_grid, std::size_t n_max,
                          double p_eff0) {
  check_common(d0, h);
  const double hbar = std::sqrt(h);
  Discretization d;
  d.window = model_window(d0, alpha, beta, h, n_max);
  d.n = n_grid ? n_grid : model_default_grid(d0, alpha, beta, h, n_max);
  const double du = 2.0 * d.window / static_cast<double>(d.n);
  if (du > hbar / 30.0 * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "model_spectrum_numeric: grid of " << d.n << " points on [-" << d.window << ", " << d.window
       << ") has spacing " << du << " > hbar/30 = " << hbar / 30.0 << "; need at least "
       << model_default_grid(d0, alpha, beta, h, n_max) << " points";
    throw std::invalid_argument(os.str());
  }
  const auto n = static_cast<Eigen::Index>(d.n);
  d.u.resize(n);
  for (Eigen::Index j = 0; j < n; ++j) d.u(j) = -d.window + static_cast<double>(j) * du;
  Eigen::VectorXd k(n);
  for (Eigen::Index m = 0; m < n; ++m) {
    const Eigen::Index mm = m < (n + 1) / 2 ? m : m - n;
    k(m) = std::numbers::pi * static_cast<double>(mm) / d.window;
  }
  d.dft.resize(n, n);
  const double norm = 1.0 / std::sqrt(static_cast<double>(n));
  for (Eigen::Index m = 0; m < n; ++m)
    for (Eigen::Index j = 0; j < n; ++j) d.dft(m, j) = std::polar(norm, -k(m) * (d.u(j) + d.window));

  // First-derivative symbol drops the unpaired Nyquist mode for even n.
  Eigen::VectorXcd symbol(n);
  for (Eigen::Index m = 0; m < n; ++m) {
    const double k1 = (n % 2 == 0 && m == n / 2) ? 0.0 : k(m);
    symbol(m) = 0.5 * d0 * h * h * k(m) * k(m) + hbar * beta * h * k1;
  }
  // dft^H diag(symbol) dft is circulant: op(j, l) depends on (j - l) mod n only.
  Eigen::VectorXcd column(n);
  for (Eigen::Index q = 0; q < n; ++q) {
    cdouble acc = 0.0;
    for (Eigen::Index m = 0; m < n; ++m)
      acc += symbol(m) * std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>((m * q) % n) / static_cast<double>(n));
    column(q) = acc / static_cast<double>(n);
  }
  d.op.resize(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index l = 0; l < n; ++l) d.op(j, l) = column((j - l + n) % n);
  for (Eigen::Index j = 0; j < n; ++j) d.op(j, j) += p_eff0 + 0.5 * d0 * d.u(j) * d.u(j) + hbar * alpha * d.u(j);
  return d;
}

double inf_norm(const Mat& m) { return m.cwiseAbs().rowwise().sum().maxCoeff(); }

}  // namespace

std::pair<cdouble, cdouble> sample_real_shift_pair(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double a = u(rng), b = u(rng);
  const double floor = std::max(std::abs(a * b), 1e-3);
  double c = u(rng);
  while (std::abs(c) < floor) c = u(rng);
  return {cdouble{a, b}, cdouble{c, -a * b / c}};
}

ModelSpectrum model_spectrum_formula(double d0, double p_eff0, cdouble alpha, cdouble beta, double h,
                                     std::size_t n_max, ShiftConvention convention) {
  check_common(d0, h);
  ModelSpectrum s;
  s.d0 = d0;
  s.p_eff0 = p_eff0;
  s.alpha = alpha;
  s.beta = beta;
  s.h = h;
  const cdouble shift = shift_constant(d0, alpha, beta, h, convention);
  for (std::size_t n = 1; n <= n_max; ++n)
    s.eigenvalues.push_back(0.5 * d0 * (2.0 * static_cast<double>(n) - 1.0) * h + p_eff0 + shift);
  return s;
}

double model_window(double d0, cdouble alpha, cdouble beta, double h, std::size_t n_max) {
  check_common(d0, h);
  // Eigenfunctions are Hermite functions of u / hbar centred near
  // hbar(-Re alpha + Im beta)/d0; their adjoints tilt the other way, so cover both.
  const double offset = (std::abs(alpha) + std::abs(beta)) / d0;
  return std::sqrt(h) * (offset + std::sqrt(2.0 * static_cast<double>(n_max) + 1.0) + 7.0);
}

std::size_t model_default_grid(double d0, cdouble alpha, cdouble beta, double h, std::size_t n_max) {
  const double w = model_window(d0, alpha, beta, h, n_max);
  auto n = static_cast<std::size_t>(std::ceil(2.0 * w / (std::sqrt(h) / 30.0)));
  return n + (n % 2);
}

ModelSpectrum model_spectrum_numeric(double d0, cdouble alpha, cdouble beta, double h, std::size_t n_grid,
                                     std::size_t n_max, double p_eff0) {
  if (n_max == 0) throw std::invalid_argument("model_spectrum_numeric: n_max must be >= 1");
  const Discretization d = discretize(d0, alpha, beta, h, n_grid, n_max, p_eff0);
  const auto n = static_cast<Eigen::Index>(d.n);
  if (static_cast<std::size_t>(n) < 4 * n_max) throw std::invalid_argument("model_spectrum_numeric: grid too small");

  // Shift-invert Arnoldi on one dense LU. The Hermitian part of the matrix is
  // p + diag(d0 u^2 / 2 + hbar Re(alpha) u) plus the circulant with symbol
  // d0 h^2 k^2 / 2 + hbar Re(beta) h k, which is bounded below by
  // p - h (Re(alpha)^2 + Re(beta)^2) / (2 d0). Every eigenvalue has its real
  // part above that bound, so sigma sits strictly left of the spectrum and the
  // eigenvalues nearest sigma are those with the smallest real parts (exactly
  // so when the spectrum is real).
  const double sigma =
      p_eff0 - h * (alpha.real() * alpha.real() + beta.real() * beta.real()) / (2.0 * d0) - 0.25 * d0 * h;
  Mat shifted = d.op;
  shifted.diagonal().array() -= sigma;
  const Eigen::PartialPivLU<Mat> lu(shifted);

  const double mnorm = inf_norm(d.op);
  const Eigen::Index m = std::min<Eigen::Index>(n - 1, static_cast<Eigen::Index>(std::max<std::size_t>(4 * n_max + 20, 40)));
  Mat basis(n, m + 1);
  Mat hess = Mat::Zero(m + 1, m);
  std::mt19937_64 rng(12345);
  std::normal_distribution<double> g;
  Vec v(n);
  for (Eigen::Index j = 0; j < n; ++j) v(j) = {g(rng), g(rng)};
  basis.col(0) = v.normalized();
  Eigen::Index built = m;
  for (Eigen::Index j = 0; j < m; ++j) {
    Vec w = lu.solve(basis.col(j));
    for (int pass = 0; pass < 2; ++pass)
      for (Eigen::Index i = 0; i <= j; ++i) {
        const cdouble c = basis.col(i).dot(w);
        hess(i, j) += c;
        w -= c * basis.col(i);
      }
    const double beta_j = w.norm();
    hess(j + 1, j) = beta_j;
    if (beta_j < 1e-14 * hess.col(j).norm()) {
      built = j + 1;
      break;
    }
    basis.col(j + 1) = w / beta_j;
  }
  Eigen::ComplexEigenSolver<Mat> es(hess.topLeftCorner(built, built), true);
  if (es.info() != Eigen::Success) throw SolverError("model_spectrum_numeric: projected eigensolver failed");

  struct Ritz {
    cdouble lambda;
    Vec vector;
  };
  std::vector<Ritz> ritz;
  for (Eigen::Index j = 0; j < built; ++j) {
    const cdouble mu = es.eigenvalues()(j);
    if (std::abs(mu) < 1e-300) continue;
    Vec y = basis.leftCols(built) * es.eigenvectors().col(j);
    ritz.push_back({sigma + 1.0 / mu, y.normalized()});
  }
  std::sort(ritz.begin(), ritz.end(), [](const Ritz& a, const Ritz& b) { return a.lambda.real() < b.lambda.real(); });
  if (ritz.size() < n_max) throw SolverError("model_spectrum_numeric: Krylov space too small for n_max levels");
  ritz.resize(n_max);

  ModelSpectrum s;
  s.d0 = d0;
  s.p_eff0 = p_eff0;
  s.alpha = alpha;
  s.beta = beta;
  s.h = h;
  for (const Ritz& r : ritz) s.eigenvalues.push_back(r.lambda);
  s.n_grid = d.n;
  s.window = d.window;

  // A posteriori certificate: each eigenvector has a small residual and
  // negligible mass at the window edges and in the top Fourier modes.
  const Eigen::Index edge = std::max<Eigen::Index>(1, n / 20);
  for (const Ritz& r : ritz) {
    const Vec& x = r.vector;
    const double residual = (d.op * x - r.lambda * x).norm() / mnorm;
    const double edge_mass = x.head(edge).squaredNorm() + x.tail(edge).squaredNorm();
    const Vec spec = d.dft * x;
    double tail = 0.0;
    for (Eigen::Index q = 0; q < n; ++q) {
      const Eigen::Index mm = q < (n + 1) / 2 ? q : n - q;
      if (mm > 2 * n / 5) tail += std::norm(spec(q));
    }
    s.max_residual = std::max(s.max_residual, residual);
    s.max_tail = std::max({s.max_tail, edge_mass, tail});
  }
  if (s.max_residual > 1e-9 || s.max_tail > 1e-12) {
    std::ostringstream os;
    os << "model_spectrum_numeric: grid too coarse (n_grid " << d.n << ", relative residual " << s.max_residual
       << ", edge/Fourier tail " << s.max_tail << ")";
    throw SolverError(os.str());
  }
  return s;
}

ResolventReport model_resolvent_bound_check(double d0, cdouble alpha, cdouble beta, double h,
                                            const std::vector<cdouble>& mu_samples, std::size_t n_grid) {
  const std::size_t n_modes = 8;
  const Discretization d = discretize(d0, alpha, beta, h, n_grid, n_modes, 0.0);
  const auto n = static_cast<Eigen::Index>(d.n);
  const cdouble ptilde = shift_constant(d0, alpha, beta, h, ShiftConvention::Exact);
  ResolventReport rep;
  rep.n_grid = d.n;
  std::mt19937_64 rng(777);
  std::normal_distribution<double> g;
  for (const cdouble mu : mu_samples) {
    ResolventSample smp;
    smp.mu = mu;
    // Nearest level (d0/2)(2j - 1), j >= 1.
    const double j = std::max(1.0, std::round(mu.real() / d0 + 0.5));
    double dist = std::abs(mu - 0.5 * d0 * (2.0 * j - 1.0));
    if (j > 1.0) dist = std::min(dist, std::abs(mu - 0.5 * d0 * (2.0 * j - 3.0)));
    dist = std::min(dist, std::abs(mu - 0.5 * d0 * (2.0 * j + 1.0)));
    smp.distance = h * dist;
    if (smp.distance < 0.1 * h) {
      smp.skipped = true;
      smp.note = "within h/10 of the spectrum";
      rep.samples.push_back(smp);
      continue;
    }
    Mat shifted = d.op;
    shifted.diagonal().array() -= ptilde + h * mu;
    const Eigen::PartialPivLU<Mat> lu(shifted);
    Vec x(n);
    for (Eigen::Index k = 0; k < n; ++k) x(k) = {g(rng), g(rng)};
    x.normalize();
    double est = 0.0;
    for (int it = 0; it < 500; ++it) {
      Vec y = lu.adjoint().solve(x);
      y = lu.solve(y);
      const double next = std::sqrt(y.norm());
      x = y / y.norm();
      if (it > 2 && std::abs(next - est) <= 1e-13 * next) {
        est = next;
        break;
      }
      est = next;
    }
    smp.norm = est;
    smp.ratio = est * smp.distance;
    rep.max_ratio = std::max(rep.max_ratio, smp.ratio);
    rep.samples.push_back(smp);
  }
  return rep;
}

std::vector<cdouble> disc_samples(cdouble center, double radius, std::size_t rings, std::size_t per_ring) {
  std::vector<cdouble> out{center};
  for (std::size_t r = 1; r <= rings; ++r) {
    const double rho = radius * static_cast<double>(r) / static_cast<double>(rings);
    for (std::size_t a = 0; a < per_ring; ++a)
      out.push_back(center + std::polar(rho, 2.0 * std::numbers::pi * (static_cast<double>(a) + 0.5 * (r % 2)) /
                                                 static_cast<double>(per_ring)));
  }
  return out;
}

}  // namespace magspec::model
