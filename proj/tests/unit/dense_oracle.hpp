#pragma once

// Dense reference computations used as independent oracles in tests.

#include <Eigen/Dense>
#include <random>
#include <vector>

#include "magspec/linalg/csr_matrix.hpp"

namespace magspec::testing {

inline Eigen::MatrixXcd to_dense(const linalg::CsrMatrix& a) {
  Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(a.nrows(), a.ncols());
  const auto off = a.row_offsets();
  const auto cols = a.col_indices();
  const auto vals = a.values();
  for (linalg::Index i = 0; i < a.nrows(); ++i)
    for (linalg::Index p = off[i]; p < off[i + 1]; ++p) d(i, cols[p]) = vals[p];
  return d;
}

inline std::vector<double> dense_eigenvalues(const linalg::CsrMatrix& a) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(to_dense(a), Eigen::EigenvaluesOnly);
  std::vector<double> out(eig.eigenvalues().data(), eig.eigenvalues().data() + eig.eigenvalues().size());
  return out;
}

/// Random sparse Hermitian matrix with roughly `per_row` off-diagonal entries per row.
inline linalg::CsrMatrix random_hermitian(linalg::Index n, int per_row, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_int_distribution<linalg::Index> col(0, n - 1);
  linalg::TripletBuilder b(n, n);
  for (linalg::Index i = 0; i < n; ++i) {
    b.add(i, i, 4.0 * u(rng));
    for (int k = 0; k < per_row; ++k) {
      const linalg::Index j = col(rng);
      if (j == i) continue;
      const double re = u(rng);
      const linalg::Complex v{re, u(rng)};
      b.add(i, j, v);
      b.add(j, i, std::conj(v));
    }
  }
  return b.build(true);
}

}  // namespace magspec::testing
