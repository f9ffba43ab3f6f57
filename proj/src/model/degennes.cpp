#include "magspec/model/degennes.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "magspec/error.hpp"

namespace magspec::model {

namespace {

// Number of eigenvalues below x of the symmetric tridiagonal matrix with
// diagonal d and constant off-diagonal e (Sturm sequence via LDL^T pivots).
std::size_t count_below(const std::vector<double>& d, double e, double x) {
  const double e2 = e * e;
  std::size_t count = 0;
  double q = 1.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    q = d[i] - x - (i == 0 ? 0.0 : e2 / q);
    if (q == 0.0) q = -1e-300;
    if (q < 0.0) ++count;
  }
  return count;
}

}  // namespace

double degennes_ground(double xi, std::size_t n, double t_max) {
  if (n < 200) throw std::invalid_argument("degennes_ground: need n >= 200, got " + std::to_string(n));
  if (!(t_max >= 15.0)) throw std::invalid_argument("degennes_ground: need t_max >= 15");
  if (!std::isfinite(xi)) throw std::invalid_argument("degennes_ground: xi must be finite");

  const double dt = t_max / static_cast<double>(n);
  const double c = 1.0 / (dt * dt);
  std::vector<double> d(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double t = (static_cast<double>(j) + 0.5) * dt;
    d[j] = 2.0 * c + (t - xi) * (t - xi);
  }
  d.front() -= c;  // mirror ghost: psi(-dt/2) = psi(dt/2)
  d.back() += c;   // odd ghost: psi vanishes at t_max

  // The matrix is an M-matrix shifted by a nonnegative potential, so 0 is a
  // lower bound; grow the upper end until it brackets the ground state.
  double lo = 0.0, hi = 1.0 + xi * xi;
  for (int guard = 0; count_below(d, -c, hi) == 0; ++guard) {
    if (guard > 200) throw SolverError("degennes_ground: failed to bracket the ground state");
    hi *= 2.0;
  }
  for (int it = 0; it < 200 && hi - lo > 4e-16 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (count_below(d, -c, mid) > 0)
      hi = mid;
    else
      lo = mid;
  }
  if (!(hi - lo <= 1e-13 * hi)) throw SolverError("degennes_ground: bisection did not converge");
  return 0.5 * (lo + hi);
}

DeGennesMinimum degennes_minimum(std::size_t n, double t_max, double xi_tol) {
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = 0.0, b = 2.0;
  double x1 = b - g * (b - a), x2 = a + g * (b - a);
  double f1 = degennes_ground(x1, n, t_max), f2 = degennes_ground(x2, n, t_max);
  std::size_t evals = 2;
  while (b - a > xi_tol) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - g * (b - a);
      f1 = degennes_ground(x1, n, t_max);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + g * (b - a);
      f2 = degennes_ground(x2, n, t_max);
    }
    ++evals;
  }
  DeGennesMinimum m;
  m.xi0 = 0.5 * (a + b);
  m.theta0 = degennes_ground(m.xi0, n, t_max);
  m.evaluations = evals + 1;
  return m;
}

}  // namespace magspec::model
