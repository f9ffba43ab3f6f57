#include "magspec/linalg/csr_matrix.hpp"

#include <algorithm>
#include <istream>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>

#include "magspec/parallel.hpp"

namespace magspec::linalg {

CsrMatrix::CsrMatrix(Index nrows, Index ncols, std::vector<Index> row_offsets, std::vector<Index> col_indices,
                     std::vector<Complex> values, bool hermitian)
    : nrows_(nrows),
      ncols_(ncols),
      row_offsets_(std::move(row_offsets)),
      col_indices_(std::move(col_indices)),
      values_(std::move(values)),
      hermitian_(hermitian) {
  if (nrows_ < 0 || ncols_ < 0) throw std::invalid_argument("CsrMatrix: negative dimension");
  if (static_cast<Index>(row_offsets_.size()) != nrows_ + 1)
    throw std::invalid_argument("CsrMatrix: row_offsets must have nrows+1 entries");
  if (col_indices_.size() != values_.size())
    throw std::invalid_argument("CsrMatrix: col_indices and values differ in length");
  if (row_offsets_.front() != 0 || row_offsets_.back() != static_cast<Index>(values_.size()))
    throw std::invalid_argument("CsrMatrix: row_offsets must start at 0 and end at nnz");
  for (Index i = 0; i < nrows_; ++i) {
    const Index b = row_offsets_[i], e = row_offsets_[i + 1];
    if (e < b) throw std::invalid_argument("CsrMatrix: row_offsets must be nondecreasing");
    for (Index p = b; p < e; ++p) {
      const Index c = col_indices_[p];
      if (c < 0 || c >= ncols_) throw std::invalid_argument("CsrMatrix: column index out of range");
      if (p > b && col_indices_[p - 1] >= c)
        throw std::invalid_argument("CsrMatrix: column indices must be strictly increasing within a row");
    }
  }
  if (hermitian_ && nrows_ != ncols_) throw std::invalid_argument("CsrMatrix: hermitian matrix must be square");
}

CsrMatrix CsrMatrix::identity(Index n) {
  std::vector<double> ones(static_cast<std::size_t>(n), 1.0);
  return diagonal(ones);
}

CsrMatrix CsrMatrix::zero(Index nrows, Index ncols) {
  return CsrMatrix(nrows, ncols, std::vector<Index>(static_cast<std::size_t>(nrows) + 1, 0), {}, {},
                   nrows == ncols);
}

CsrMatrix CsrMatrix::diagonal(std::span<const double> d) {
  const auto n = static_cast<Index>(d.size());
  std::vector<Index> offsets(d.size() + 1);
  std::vector<Index> cols(d.size());
  std::vector<Complex> vals(d.size());
  for (Index i = 0; i < n; ++i) {
    offsets[i + 1] = i + 1;
    cols[i] = i;
    vals[i] = d[i];
  }
  return CsrMatrix(n, n, std::move(offsets), std::move(cols), std::move(vals), true);
}

Complex CsrMatrix::at(Index i, Index j) const {
  const auto b = col_indices_.begin() + row_offsets_[i];
  const auto e = col_indices_.begin() + row_offsets_[i + 1];
  const auto it = std::lower_bound(b, e, j);
  if (it == e || *it != j) return {};
  return values_[static_cast<std::size_t>(it - col_indices_.begin())];
}

bool CsrMatrix::is_exactly_hermitian() const {
  if (nrows_ != ncols_) return false;
  for (Index i = 0; i < nrows_; ++i) {
    for (Index p = row_offsets_[i]; p < row_offsets_[i + 1]; ++p) {
      const Index j = col_indices_[p];
      if (at(j, i) != std::conj(values_[p])) return false;
    }
  }
  return true;
}

double CsrMatrix::norm_estimate() const {
  double best = 0.0;
  for (Index i = 0; i < nrows_; ++i) {
    double s = 0.0;
    for (Index p = row_offsets_[i]; p < row_offsets_[i + 1]; ++p) s += std::abs(values_[p]);
    best = std::max(best, s);
  }
  return best;
}

double CsrMatrix::gershgorin_lower() const {
  if (nrows_ == 0) return 0.0;
  double lower = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < nrows_; ++i) {
    double diag = 0.0, off = 0.0;
    for (Index p = row_offsets_[i]; p < row_offsets_[i + 1]; ++p) {
      if (col_indices_[p] == i)
        diag = values_[p].real();
      else
        off += std::abs(values_[p]);
    }
    lower = std::min(lower, diag - off);
  }
  return lower;
}

void CsrMatrix::write_text(std::ostream& os) const {
  os << nrows_ << ' ' << ncols_ << ' ' << nnz() << '\n';
  const auto old = os.precision(std::numeric_limits<double>::max_digits10);
  for (Index i = 0; i < nrows_; ++i)
    for (Index p = row_offsets_[i]; p < row_offsets_[i + 1]; ++p)
      os << i << ' ' << col_indices_[p] << ' ' << values_[p].real() << ' ' << values_[p].imag() << '\n';
  os.precision(old);
}

CsrMatrix CsrMatrix::read_text(std::istream& is, bool hermitian) {
  Index nr = 0, nc = 0, nz = 0;
  if (!(is >> nr >> nc >> nz)) throw std::invalid_argument("CsrMatrix::read_text: bad header");
  TripletBuilder builder(nr, nc);
  for (Index k = 0; k < nz; ++k) {
    Index i = 0, j = 0;
    double re = 0.0, im = 0.0;
    if (!(is >> i >> j >> re >> im))
      throw std::invalid_argument("CsrMatrix::read_text: truncated entry list at entry " + std::to_string(k));
    builder.add(i, j, {re, im});
  }
  return builder.build(hermitian);
}

void TripletBuilder::add(Index row, Index col, Complex value) {
  if (row < 0 || row >= nrows_ || col < 0 || col >= ncols_)
    throw std::invalid_argument("TripletBuilder: entry out of range");
  entries_.push_back({row, col, value});
}

CsrMatrix TripletBuilder::build(bool hermitian) const {
  auto sorted = entries_;
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const Entry& a, const Entry& b) { return a.row != b.row ? a.row < b.row : a.col < b.col; });
  std::vector<Index> offsets(static_cast<std::size_t>(nrows_) + 1, 0);
  std::vector<Index> cols;
  std::vector<Complex> vals;
  cols.reserve(sorted.size());
  vals.reserve(sorted.size());
  for (std::size_t k = 0; k < sorted.size();) {
    std::size_t m = k;
    Complex sum{};
    while (m < sorted.size() && sorted[m].row == sorted[k].row && sorted[m].col == sorted[k].col) sum += sorted[m++].value;
    cols.push_back(sorted[k].col);
    vals.push_back(sum);
    ++offsets[static_cast<std::size_t>(sorted[k].row) + 1];
    k = m;
  }
  for (std::size_t i = 0; i < static_cast<std::size_t>(nrows_); ++i) offsets[i + 1] += offsets[i];
  return CsrMatrix(nrows_, ncols_, std::move(offsets), std::move(cols), std::move(vals), hermitian);
}

void matvec(const CsrMatrix& a, std::span<const Complex> x, std::span<Complex> y) {
  if (static_cast<Index>(x.size()) != a.ncols() || static_cast<Index>(y.size()) != a.nrows())
    throw std::invalid_argument("matvec: dimension mismatch (matrix " + std::to_string(a.nrows()) + "x" +
                                std::to_string(a.ncols()) + ", x " + std::to_string(x.size()) + ", y " +
                                std::to_string(y.size()) + ")");
  const Index* offsets = a.row_offsets().data();
  const Index* cols = a.col_indices().data();
  const Complex* vals = a.values().data();
  const Complex* xp = x.data();
  Complex* yp = y.data();
  parallel_for(static_cast<std::size_t>(a.nrows()), [=](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      double re = 0.0, im = 0.0;
      const Index stop = offsets[i + 1];
      for (Index p = offsets[i]; p < stop; ++p) {
        const double vr = vals[p].real(), vi = vals[p].imag();
        const double ur = xp[cols[p]].real(), ui = xp[cols[p]].imag();
        re += vr * ur - vi * ui;
        im += vr * ui + vi * ur;
      }
      yp[i] = {re, im};
    }
  });
}

CVector matvec(const CsrMatrix& a, std::span<const Complex> x) {
  CVector y(static_cast<std::size_t>(a.nrows()));
  matvec(a, x, y);
  return y;
}

}  // namespace magspec::linalg
