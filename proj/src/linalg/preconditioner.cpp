#include "magspec/linalg/preconditioner.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace magspec::linalg {

std::string_view to_string(PreconditionerKind k) {
  switch (k) {
    case PreconditionerKind::None:
      return "none";
    case PreconditionerKind::Jacobi:
      return "jacobi";
    case PreconditionerKind::IncompleteCholesky:
      return "ic0";
  }
  return "none";
}

PreconditionerKind preconditioner_from_string(std::string_view name) {
  if (name == "none") return PreconditionerKind::None;
  if (name == "jacobi") return PreconditionerKind::Jacobi;
  if (name == "ic0") return PreconditionerKind::IncompleteCholesky;
  throw std::invalid_argument("unknown preconditioner '" + std::string(name) + "' (expected none, jacobi or ic0)");
}

JacobiPreconditioner::JacobiPreconditioner(const CsrMatrix& a, double shift) : inv_diag_(static_cast<std::size_t>(a.nrows())) {
  for (Index i = 0; i < a.nrows(); ++i) {
    const double d = a.at(i, i).real() - shift;
    inv_diag_[static_cast<std::size_t>(i)] = d > 0.0 ? 1.0 / d : 1.0;
  }
}

void JacobiPreconditioner::apply(std::span<const Complex> r, std::span<Complex> z) const {
  for (std::size_t i = 0; i < r.size(); ++i) z[i] = r[i] * inv_diag_[i];
}

std::unique_ptr<IncompleteCholesky> IncompleteCholesky::factor(const CsrMatrix& a, double shift) {
  const Index n = a.nrows();
  std::unique_ptr<IncompleteCholesky> ic(new IncompleteCholesky());
  ic->offsets_.assign(static_cast<std::size_t>(n) + 1, 0);
  ic->diag_.assign(static_cast<std::size_t>(n), 0.0);
  const auto ao = a.row_offsets();
  const auto ac = a.col_indices();
  const auto av = a.values();
  for (Index i = 0; i < n; ++i) {
    for (Index p = ao[i]; p < ao[i + 1] && ac[p] < i; ++p) {
      ic->cols_.push_back(ac[p]);
      ic->vals_.push_back(av[p]);
    }
    ic->offsets_[static_cast<std::size_t>(i) + 1] = static_cast<Index>(ic->cols_.size());
  }
  auto& L = ic->vals_;
  const auto& off = ic->offsets_;
  const auto& col = ic->cols_;
  for (Index i = 0; i < n; ++i) {
    double d = a.at(i, i).real() - shift;
    for (Index p = off[i]; p < off[i + 1]; ++p) {
      const Index k = col[p];
      // L_ik = (a_ik - sum_{j<k} L_ij conj(L_kj)) / L_kk over the shared pattern.
      Complex s = L[p];
      Index q = off[i], r = off[k];
      while (q < p && r < off[k + 1]) {
        if (col[q] == col[r]) {
          s -= L[q] * std::conj(L[r]);
          ++q;
          ++r;
        } else if (col[q] < col[r]) {
          ++q;
        } else {
          ++r;
        }
      }
      L[p] = s / ic->diag_[static_cast<std::size_t>(k)];
      d -= std::norm(L[p]);
    }
    if (!(d > 0.0)) return nullptr;
    ic->diag_[static_cast<std::size_t>(i)] = std::sqrt(d);
  }
  ic->inv_diag_.resize(ic->diag_.size());
  for (std::size_t i = 0; i < ic->diag_.size(); ++i) ic->inv_diag_[i] = 1.0 / ic->diag_[i];
  return ic;
}

void IncompleteCholesky::apply(std::span<const Complex> r, std::span<Complex> z) const {
  const std::size_t n = r.size();
  for (std::size_t i = 0; i < n; ++i) {
    double re = r[i].real(), im = r[i].imag();
    for (Index p = offsets_[i]; p < offsets_[i + 1]; ++p) {
      const Complex& l = vals_[p];
      const Complex& y = z[static_cast<std::size_t>(cols_[p])];
      re -= l.real() * y.real() - l.imag() * y.imag();
      im -= l.real() * y.imag() + l.imag() * y.real();
    }
    z[i] = {re * inv_diag_[i], im * inv_diag_[i]};
  }
  for (std::size_t i = n; i-- > 0;) {
    const Complex zi = {z[i].real() * inv_diag_[i], z[i].imag() * inv_diag_[i]};
    z[i] = zi;
    for (Index p = offsets_[i]; p < offsets_[i + 1]; ++p) {
      // z_j -= conj(L_ij) z_i
      const Complex& l = vals_[p];
      Complex& zj = z[static_cast<std::size_t>(cols_[p])];
      zj = {zj.real() - (l.real() * zi.real() + l.imag() * zi.imag()),
            zj.imag() - (l.real() * zi.imag() - l.imag() * zi.real())};
    }
  }
}

std::unique_ptr<Preconditioner> make_preconditioner(PreconditionerKind kind, const CsrMatrix& a, double shift) {
  switch (kind) {
    case PreconditionerKind::None:
      return nullptr;
    case PreconditionerKind::Jacobi:
      return std::make_unique<JacobiPreconditioner>(a, shift);
    case PreconditionerKind::IncompleteCholesky:
      if (auto ic = IncompleteCholesky::factor(a, shift)) return ic;
      return std::make_unique<JacobiPreconditioner>(a, shift);
  }
  return nullptr;
}

}  // namespace magspec::linalg
