#pragma once

#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "magspec/linalg/csr_matrix.hpp"

namespace magspec::linalg {

enum class PreconditionerKind { None, Jacobi, IncompleteCholesky };

std::string_view to_string(PreconditionerKind k);
PreconditionerKind preconditioner_from_string(std::string_view name);

/// Approximate inverse of A - shift I applied inside conjugate gradient.
class Preconditioner {
 public:
  virtual ~Preconditioner() = default;
  virtual void apply(std::span<const Complex> r, std::span<Complex> z) const = 0;
  virtual PreconditionerKind kind() const = 0;
};

class JacobiPreconditioner final : public Preconditioner {
 public:
  JacobiPreconditioner(const CsrMatrix& a, double shift);
  void apply(std::span<const Complex> r, std::span<Complex> z) const override;
  PreconditionerKind kind() const override { return PreconditionerKind::Jacobi; }

 private:
  std::vector<double> inv_diag_;
};

/// Zero fill-in incomplete Cholesky L L^H of A - shift I on the lower
/// triangle of A's sparsity pattern.
class IncompleteCholesky final : public Preconditioner {
 public:
  /// Returns nullptr when a pivot is not positive.
  static std::unique_ptr<IncompleteCholesky> factor(const CsrMatrix& a, double shift);
  void apply(std::span<const Complex> r, std::span<Complex> z) const override;
  PreconditionerKind kind() const override { return PreconditionerKind::IncompleteCholesky; }

 private:
  IncompleteCholesky() = default;
  std::vector<Index> offsets_, cols_;  // strictly lower part, rows sorted
  std::vector<Complex> vals_;
  std::vector<double> diag_, inv_diag_;
};

/// Builds the requested preconditioner; an incomplete Cholesky breakdown
/// falls back to Jacobi. None yields nullptr.
std::unique_ptr<Preconditioner> make_preconditioner(PreconditionerKind kind, const CsrMatrix& a, double shift);

}  // namespace magspec::linalg
