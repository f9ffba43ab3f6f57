#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <string_view>
#include <vector>

#include "magspec/linalg/csr_matrix.hpp"
#include "magspec/linalg/preconditioner.hpp"

namespace magspec::linalg {

enum class EigenStrategy { ShiftInvertLanczos, Lobpcg };

std::string_view to_string(EigenStrategy s);
EigenStrategy eigen_strategy_from_string(std::string_view name);

struct EigenOptions {
  std::size_t k = 1;
  /// Relative residual target: ||A v - lambda v|| <= tol * ||A||_est.
  double tol = 1e-8;
  EigenStrategy strategy = EigenStrategy::ShiftInvertLanczos;
  std::uint64_t seed = 0x6d61677370656331ULL;
  /// Cap on inner solves (shift-invert) or block iterations (LOBPCG).
  std::size_t max_iterations = 5000;
  /// Krylov basis size before a thick restart; 0 picks max(2k + 10, 24).
  std::size_t subspace_dim = 0;
  /// Shift for the inverted operator. Must lie strictly below the smallest
  /// eigenvalue; NaN selects the Gershgorin bound minus 1e-3 ||A||_est.
  double lower_bound = std::numeric_limits<double>::quiet_NaN();
  double inner_tol = 1e-10;
  PreconditionerKind preconditioner = PreconditionerKind::IncompleteCholesky;
  std::size_t inner_max_iterations = 20000;
};

struct EigenReport {
  std::vector<double> eigenvalues;           // ascending
  std::vector<CVector> eigenvectors;         // unit 2-norm, phase-normalized
  std::vector<double> residual_norms;        // ||A v - lambda v||
  std::size_t iterations = 0;
  std::size_t inner_iterations = 0;
  bool converged = false;
  double norm_estimate = 0.0;
  double shift = 0.0;
};

/// k smallest eigenpairs of a Hermitian CSR matrix.
///
/// ShiftInvertLanczos builds a Krylov space of (A - sigma I)^{-1} with full
/// reorthogonalization, where sigma sits below the Gershgorin bound and each
/// application is a conjugate-gradient solve; Ritz pairs come from a
/// Rayleigh-Ritz projection of A itself so inexact inner solves only slow
/// convergence. Lobpcg runs an unpreconditioned block LOBPCG iteration.
/// When the iteration budget runs out the report carries converged=false
/// and the current best Ritz pairs.
EigenReport smallest_eigenpairs(const CsrMatrix& a, const EigenOptions& options);

}  // namespace magspec::linalg
