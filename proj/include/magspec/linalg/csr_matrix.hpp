#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "magspec/linalg/vector_ops.hpp"

namespace magspec::linalg {

using Index = std::int64_t;

/// Compressed sparse row matrix with complex double entries.
///
/// Construction validates the structural invariants: row_offsets has
/// nrows+1 nondecreasing entries ending at nnz, and column indices are
/// strictly increasing inside every row. The hermitian flag is a promise by
/// the producer; is_exactly_hermitian() checks it entrywise.
class CsrMatrix {
 public:
  CsrMatrix() = default;
  CsrMatrix(Index nrows, Index ncols, std::vector<Index> row_offsets, std::vector<Index> col_indices,
            std::vector<Complex> values, bool hermitian = false);

  static CsrMatrix identity(Index n);
  static CsrMatrix zero(Index nrows, Index ncols);
  static CsrMatrix diagonal(std::span<const double> d);

  Index nrows() const { return nrows_; }
  Index ncols() const { return ncols_; }
  Index nnz() const { return static_cast<Index>(values_.size()); }
  bool hermitian() const { return hermitian_; }

  std::span<const Index> row_offsets() const { return row_offsets_; }
  std::span<const Index> col_indices() const { return col_indices_; }
  std::span<const Complex> values() const { return values_; }

  /// Entry (i, j), zero when not stored.
  Complex at(Index i, Index j) const;

  bool is_exactly_hermitian() const;

  /// Maximum absolute row sum; bounds the spectral radius.
  double norm_estimate() const;

  /// Lower bound on the spectrum of a Hermitian matrix from Gershgorin discs.
  double gershgorin_lower() const;

  /// Text dump: header "nrows ncols nnz", then one "row col re im" line per entry.
  void write_text(std::ostream& os) const;
  static CsrMatrix read_text(std::istream& is, bool hermitian = false);

 private:
  Index nrows_ = 0;
  Index ncols_ = 0;
  std::vector<Index> row_offsets_{0};
  std::vector<Index> col_indices_;
  std::vector<Complex> values_;
  bool hermitian_ = false;
};

/// Accumulates (row, col, value) entries; duplicates are summed.
class TripletBuilder {
 public:
  TripletBuilder(Index nrows, Index ncols) : nrows_(nrows), ncols_(ncols) {}
  void add(Index row, Index col, Complex value);
  CsrMatrix build(bool hermitian = false) const;

 private:
  struct Entry {
    Index row, col;
    Complex value;
  };
  Index nrows_, ncols_;
  std::vector<Entry> entries_;
};

/// y = A x with row-major accumulation in stored column order.
void matvec(const CsrMatrix& a, std::span<const Complex> x, std::span<Complex> y);
CVector matvec(const CsrMatrix& a, std::span<const Complex> x);

}  // namespace magspec::linalg
