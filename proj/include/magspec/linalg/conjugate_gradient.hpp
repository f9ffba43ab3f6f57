#pragma once

#include <cstddef>
#include <span>

#include "magspec/linalg/csr_matrix.hpp"
#include "magspec/linalg/preconditioner.hpp"

namespace magspec::linalg {

struct CgResult {
  std::size_t iterations = 0;
  double relative_residual = 0.0;
  bool converged = false;
};

/// Solves (A - shift I) x = b for Hermitian positive definite A - shift I.
///
/// x is used as the initial guess. Throws SolverError when the search
/// direction loses positive curvature, which means the shift does not lie
/// below the spectrum. The stopping test uses the unpreconditioned
/// residual ||b - (A - shift I) x|| <= rel_tol ||b||.
CgResult conjugate_gradient(const CsrMatrix& a, double shift, std::span<const Complex> b, std::span<Complex> x,
                            double rel_tol, std::size_t max_iterations, const Preconditioner* precond = nullptr);

}  // namespace magspec::linalg
