#include "magspec/linalg/conjugate_gradient.hpp"

#include <sstream>

#include "magspec/error.hpp"

namespace magspec::linalg {

CgResult conjugate_gradient(const CsrMatrix& a, double shift, std::span<const Complex> b, std::span<Complex> x,
                            double rel_tol, std::size_t max_iterations, const Preconditioner* precond) {
  const std::size_t n = b.size();
  CVector r(n), z(n), p(n), ap(n);
  matvec(a, x, ap);
  for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - (ap[i] - shift * x[i]);
  const double bnorm = norm2(b);
  CgResult result;
  if (bnorm == 0.0) {
    for (auto& v : x) v = 0.0;
    result.converged = true;
    return result;
  }
  auto precondition = [&] {
    if (precond)
      precond->apply(r, z);
    else
      z = r;
  };
  precondition();
  p = z;
  double rz = std::real(dot(r, z));
  double rnorm = norm2(r);
  for (std::size_t it = 0; it < max_iterations; ++it) {
    if (rnorm <= rel_tol * bnorm) {
      result.iterations = it;
      result.relative_residual = rnorm / bnorm;
      result.converged = true;
      return result;
    }
    matvec(a, p, ap);
    axpy(-shift, p, ap);
    const double curvature = std::real(dot(p, ap));
    if (!(curvature > 0.0)) {
      std::ostringstream msg;
      msg << "conjugate gradient breakdown: A - sigma I is not positive definite at shift sigma = " << shift;
      throw SolverError(msg.str());
    }
    const double step = rz / curvature;
    axpy(step, p, x);
    axpy(-step, ap, r);
    rnorm = norm2(r);
    precondition();
    const double rz_new = std::real(dot(r, z));
    const double beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  result.iterations = max_iterations;
  result.relative_residual = rnorm / bnorm;
  result.converged = result.relative_residual <= rel_tol;
  return result;
}

}  // namespace magspec::linalg
