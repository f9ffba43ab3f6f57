#include <cmath>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "magspec/error.hpp"
#include "magspec/linalg/conjugate_gradient.hpp"
#include "magspec/linalg/csr_matrix.hpp"
#include "magspec/linalg/eigensolver.hpp"
#include "unit/dense_oracle.hpp"

using namespace magspec;
using namespace magspec::linalg;

namespace {

CsrMatrix dirichlet_laplacian(Index n, double spacing) {
  TripletBuilder b(n, n);
  const double c = 1.0 / (spacing * spacing);
  for (Index i = 0; i < n; ++i) {
    b.add(i, i, 2.0 * c);
    if (i > 0) b.add(i, i - 1, -c);
    if (i + 1 < n) b.add(i, i + 1, -c);
  }
  return b.build(true);
}

EigenOptions options(std::size_t k, EigenStrategy s, double tol = 1e-8) {
  EigenOptions o;
  o.k = k;
  o.strategy = s;
  o.tol = tol;
  return o;
}

}  // namespace

TEST_CASE("matvec: identity and zero matrices") {
  const CVector x{1.0, 2.0, 3.0};
  CHECK(matvec(CsrMatrix::identity(3), x) == x);
  const CVector y = matvec(CsrMatrix::zero(3, 3), x);
  for (const auto& v : y) CHECK(v == Complex{});
}

TEST_CASE("matvec: random 5x5 against dense product") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  TripletBuilder b(5, 5);
  for (Index i = 0; i < 5; ++i)
    for (Index j = 0; j < 5; ++j)
      if (u(rng) > -0.2) b.add(i, j, {u(rng), u(rng)});
  const CsrMatrix a = b.build();
  CVector x(5);
  for (auto& v : x) v = {u(rng), u(rng)};
  const CVector y = matvec(a, x);
  const Eigen::VectorXcd yd = testing::to_dense(a) * Eigen::Map<const Eigen::VectorXcd>(x.data(), 5);
  for (int i = 0; i < 5; ++i) CHECK(std::abs(y[i] - yd(i)) < 1e-13);
}

TEST_CASE("matvec: dimension mismatch is rejected") {
  const CVector x(4);
  CHECK_THROWS_AS(matvec(CsrMatrix::identity(3), x), std::invalid_argument);
}

TEST_CASE("CsrMatrix: invariants are enforced at construction") {
  CHECK_THROWS_AS(CsrMatrix(2, 2, {0, 1}, {0}, {1.0}), std::invalid_argument);             // offsets too short
  CHECK_THROWS_AS(CsrMatrix(2, 2, {0, 2, 1}, {0}, {1.0}), std::invalid_argument);          // decreasing
  CHECK_THROWS_AS(CsrMatrix(1, 2, {0, 2}, {1, 0}, {1.0, 1.0}), std::invalid_argument);     // unsorted cols
  CHECK_THROWS_AS(CsrMatrix(1, 2, {0, 2}, {1, 1}, {1.0, 1.0}), std::invalid_argument);     // duplicate col
  CHECK_NOTHROW(CsrMatrix(2, 2, {0, 1, 2}, {1, 0}, {1.0, 1.0}, true));
}

TEST_CASE("CsrMatrix: text dump round-trips the stored entries") {
  const CsrMatrix a = testing::random_hermitian(12, 3, 11);
  std::stringstream ss;
  a.write_text(ss);
  std::string header;
  std::getline(ss, header);
  CHECK(header == std::to_string(a.nrows()) + " " + std::to_string(a.ncols()) + " " + std::to_string(a.nnz()));
  ss.seekg(0);
  const CsrMatrix b = CsrMatrix::read_text(ss, true);
  REQUIRE(b.nnz() == a.nnz());
  for (Index i = 0; i < a.nrows(); ++i)
    for (Index j = 0; j < a.ncols(); ++j) CHECK(a.at(i, j) == b.at(i, j));
}

TEST_CASE("TripletBuilder: symmetric assembly is exactly hermitian") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) CHECK(testing::random_hermitian(40, 4, seed).is_exactly_hermitian());
  TripletBuilder b(2, 2);
  b.add(0, 1, {1.0, 1.0});
  b.add(1, 0, {1.0, 1.0});
  CHECK_FALSE(b.build().is_exactly_hermitian());
}

TEST_CASE("conjugate_gradient: breakdown names the shift") {
  const std::vector<double> d{1.0, 2.0, 3.0};
  const CsrMatrix a = CsrMatrix::diagonal(d);
  const CVector b{1.0, 1.0, 1.0};
  CVector x(3);
  try {
    conjugate_gradient(a, 2.5, b, x, 1e-12, 100);
    FAIL("expected breakdown");
  } catch (const SolverError& e) {
    CHECK(std::string(e.what()).find("2.5") != std::string::npos);
  }
}

TEST_CASE("smallest_eigenpairs: 1D Dirichlet Laplacian matches discrete dispersion") {
  const Index n = 100;
  const double spacing = std::numbers::pi / (n + 1);
  const CsrMatrix a = dirichlet_laplacian(n, spacing);
  const EigenReport rep = smallest_eigenpairs(a, options(3, EigenStrategy::ShiftInvertLanczos, 1e-10));
  REQUIRE(rep.converged);
  for (int j = 1; j <= 3; ++j) {
    const double exact = 2.0 * (1.0 - std::cos(j * spacing)) / (spacing * spacing);
    CHECK(std::abs(rep.eigenvalues[j - 1] - exact) < 1e-10);
  }
}

TEST_CASE("smallest_eigenpairs: diagonal matrix, both strategies") {
  const std::vector<double> d{5.0, 1.0, 3.0};
  const CsrMatrix a = CsrMatrix::diagonal(d);
  for (auto s : {EigenStrategy::ShiftInvertLanczos, EigenStrategy::Lobpcg}) {
    const EigenReport rep = smallest_eigenpairs(a, options(2, s));
    REQUIRE(rep.converged);
    CHECK(rep.eigenvalues[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rep.eigenvalues[1] == doctest::Approx(3.0).epsilon(1e-12));
  }
}

TEST_CASE("smallest_eigenpairs: agreement with dense diagonalization on 50x50") {
  const CsrMatrix a = testing::random_hermitian(50, 4, 2024);
  const auto exact = testing::dense_eigenvalues(a);
  for (auto s : {EigenStrategy::ShiftInvertLanczos, EigenStrategy::Lobpcg}) {
    const EigenReport rep = smallest_eigenpairs(a, options(5, s));
    REQUIRE(rep.converged);
    for (int i = 0; i < 5; ++i) CHECK(std::abs(rep.eigenvalues[i] - exact[i]) < 1e-9);
  }
}

TEST_CASE("smallest_eigenpairs: residual contract and orthonormality (property)") {
  for (std::uint64_t seed = 100; seed < 108; ++seed) {
    std::mt19937_64 rng(seed);
    const Index n = std::uniform_int_distribution<Index>(10, 200)(rng);
    const std::size_t k = std::uniform_int_distribution<std::size_t>(1, 6)(rng);
    const CsrMatrix a = testing::random_hermitian(n, 3, seed);
    for (auto s : {EigenStrategy::ShiftInvertLanczos, EigenStrategy::Lobpcg}) {
      const EigenReport rep = smallest_eigenpairs(a, options(k, s));
      REQUIRE(rep.converged);
      const auto exact = testing::dense_eigenvalues(a);
      for (std::size_t i = 0; i < k; ++i) {
        CHECK(rep.residual_norms[i] <= 1e-8 * rep.norm_estimate);
        const CVector av = matvec(a, rep.eigenvectors[i]);
        CVector r = av;
        axpy(-rep.eigenvalues[i], rep.eigenvectors[i], r);
        CHECK(norm2(r) <= 1e-8 * rep.norm_estimate);
        CHECK(std::abs(rep.eigenvalues[i] - exact[i]) < 1e-9);
        if (i > 0) CHECK(rep.eigenvalues[i] >= rep.eigenvalues[i - 1]);
        for (std::size_t j = 0; j < k; ++j) {
          const double expect = i == j ? 1.0 : 0.0;
          CHECK(std::abs(dot(rep.eigenvectors[i], rep.eigenvectors[j]) - expect) <= 1e-8);
        }
      }
    }
  }
}

TEST_CASE("smallest_eigenpairs: deterministic for a fixed seed") {
  const CsrMatrix a = testing::random_hermitian(80, 3, 5);
  const auto r1 = smallest_eigenpairs(a, options(3, EigenStrategy::ShiftInvertLanczos));
  const auto r2 = smallest_eigenpairs(a, options(3, EigenStrategy::ShiftInvertLanczos));
  CHECK(r1.eigenvalues == r2.eigenvalues);
  CHECK(r1.eigenvectors == r2.eigenvectors);
}

TEST_CASE("smallest_eigenpairs: exhausted budget reports partial results") {
  const CsrMatrix a = dirichlet_laplacian(400, 0.01);
  EigenOptions o = options(4, EigenStrategy::Lobpcg, 1e-14);
  o.max_iterations = 3;
  const EigenReport rep = smallest_eigenpairs(a, o);
  CHECK_FALSE(rep.converged);
  CHECK(rep.eigenvalues.size() == 4);
}

TEST_CASE("smallest_eigenpairs: precondition violations") {
  TripletBuilder b(2, 2);
  b.add(0, 0, 1.0);
  b.add(1, 1, 2.0);
  CHECK_THROWS_AS(smallest_eigenpairs(b.build(false), options(1, EigenStrategy::Lobpcg)), std::invalid_argument);
  CHECK_THROWS_AS(smallest_eigenpairs(CsrMatrix::identity(2), options(0, EigenStrategy::Lobpcg)),
                  std::invalid_argument);
  CHECK_THROWS_AS(smallest_eigenpairs(CsrMatrix::identity(2), options(1, EigenStrategy::Lobpcg, 0.0)),
                  std::invalid_argument);
}
