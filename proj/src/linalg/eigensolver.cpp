#include "magspec/linalg/eigensolver.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include "magspec/error.hpp"
#include "magspec/linalg/conjugate_gradient.hpp"

namespace magspec::linalg {

std::string_view to_string(EigenStrategy s) {
  switch (s) {
    case EigenStrategy::ShiftInvertLanczos:
      return "shift-invert-lanczos";
    case EigenStrategy::Lobpcg:
      return "lobpcg";
  }
  return "unknown";
}

EigenStrategy eigen_strategy_from_string(std::string_view name) {
  if (name == "shift-invert-lanczos") return EigenStrategy::ShiftInvertLanczos;
  if (name == "lobpcg") return EigenStrategy::Lobpcg;
  throw std::invalid_argument("unknown eigensolver strategy '" + std::string(name) + "'");
}

namespace {

using DenseMatrix = Eigen::MatrixXcd;

CVector random_vector(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  CVector v(n);
  for (auto& x : v) {
    const double re = dist(rng);
    x = {re, dist(rng)};
  }
  return v;
}

// Two passes of classical Gram-Schmidt against an orthonormal set; returns the
// norm that remains after projection.
double orthogonalize(CVector& v, const std::vector<CVector>& basis) {
  for (int pass = 0; pass < 2; ++pass)
    for (const auto& q : basis) axpy(-dot(q, v), q, v);
  return norm2(v);
}

// Adds v to the orthonormal basis if it carries a new direction; otherwise
// tries random replacements. Returns false once the basis spans everything.
bool append_orthonormal(CVector v, std::vector<CVector>& basis, std::mt19937_64& rng) {
  const std::size_t n = v.size();
  if (basis.size() >= n) return false;
  for (int attempt = 0; attempt < 8; ++attempt) {
    const double before = norm2(v);
    const double after = orthogonalize(v, basis);
    if (before > 0.0 && after > 1e-10 * before) {
      scale(1.0 / after, v);
      basis.push_back(std::move(v));
      return true;
    }
    v = random_vector(n, rng);
  }
  return false;
}

// Fixes the global phase so the first large component is real positive; makes
// returned vectors reproducible.
void normalize_phase(CVector& v) {
  const double nrm = norm2(v);
  if (nrm == 0.0) return;
  std::size_t best = 0;
  double best_mag = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double m = std::abs(v[i]);
    if (m > best_mag * (1.0 + 1e-8)) {
      best_mag = m;
      best = i;
    }
  }
  const Complex phase = std::conj(v[best]) / (std::abs(v[best]) * nrm);
  scale(phase, v);
}

CVector combine(const std::vector<CVector>& basis, const Eigen::VectorXcd& coeffs) {
  CVector y(basis.front().size(), Complex{});
  for (std::size_t j = 0; j < basis.size(); ++j) axpy(coeffs(static_cast<Eigen::Index>(j)), basis[j], y);
  return y;
}

struct RitzSet {
  std::vector<double> values;
  std::vector<CVector> vectors;
  std::vector<CVector> residuals;
  std::vector<double> residual_norms;
  Eigen::MatrixXcd coeffs;
};

// Rayleigh-Ritz of A on an orthonormal basis whose projected matrix is h.
RitzSet rayleigh_ritz(const CsrMatrix& a, const std::vector<CVector>& basis, const DenseMatrix& h, std::size_t k) {
  const auto nb = static_cast<Eigen::Index>(basis.size());
  Eigen::SelfAdjointEigenSolver<DenseMatrix> eig(h.topLeftCorner(nb, nb));
  if (eig.info() != Eigen::Success) throw SolverError("Rayleigh-Ritz: dense eigensolver failed");
  RitzSet out;
  const std::size_t count = std::min<std::size_t>(k, basis.size());
  out.coeffs = eig.eigenvectors();
  for (std::size_t i = 0; i < count; ++i) {
    CVector y = combine(basis, eig.eigenvectors().col(static_cast<Eigen::Index>(i)));
    const double nrm = norm2(y);
    scale(1.0 / nrm, y);
    CVector r = matvec(a, y);
    const double theta = std::real(dot(y, r));
    axpy(-theta, y, r);
    out.values.push_back(theta);
    out.residual_norms.push_back(norm2(r));
    out.vectors.push_back(std::move(y));
    out.residuals.push_back(std::move(r));
  }
  return out;
}

EigenReport finish(RitzSet&& ritz, double norm_est, double shift, std::size_t iterations, std::size_t inner,
                   bool converged) {
  EigenReport rep;
  std::vector<std::size_t> order(ritz.values.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return ritz.values[a] < ritz.values[b]; });
  for (auto i : order) {
    rep.eigenvalues.push_back(ritz.values[i]);
    normalize_phase(ritz.vectors[i]);
    rep.eigenvectors.push_back(std::move(ritz.vectors[i]));
    rep.residual_norms.push_back(ritz.residual_norms[i]);
  }
  rep.iterations = iterations;
  rep.inner_iterations = inner;
  rep.converged = converged;
  rep.norm_estimate = norm_est;
  rep.shift = shift;
  return rep;
}

EigenReport shift_invert_lanczos(const CsrMatrix& a, const EigenOptions& opt) {
  const auto n = static_cast<std::size_t>(a.nrows());
  const std::size_t k = opt.k;
  const double norm_est = a.norm_estimate();
  const double threshold = opt.tol * (norm_est > 0.0 ? norm_est : 1.0);
  const double shift = std::isfinite(opt.lower_bound)
                           ? opt.lower_bound
                           : a.gershgorin_lower() - (norm_est > 0.0 ? 1e-3 * norm_est : 1.0);
  std::size_t m = opt.subspace_dim ? opt.subspace_dim : std::max<std::size_t>(2 * k + 10, 24);
  m = std::min(m, n);
  const std::size_t keep = std::min(m > 1 ? m - 1 : 1, k + std::max<std::size_t>(2, k));

  std::mt19937_64 rng(opt.seed);
  std::vector<CVector> basis;
  basis.reserve(m);
  DenseMatrix h = DenseMatrix::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));

  std::size_t iterations = 0, inner = 0;
  RitzSet ritz;

  const auto precond = make_preconditioner(opt.preconditioner, a, shift);
  auto apply_inverse = [&](const CVector& rhs) {
    CVector x(n, Complex{});
    const auto res = conjugate_gradient(a, shift, rhs, x, opt.inner_tol, opt.inner_max_iterations, precond.get());
    inner += res.iterations;
    ++iterations;
    return x;
  };

  auto extend = [&](CVector v) {
    if (!append_orthonormal(std::move(v), basis, rng)) return false;
    const std::size_t j = basis.size() - 1;
    const CVector av = matvec(a, basis[j]);
    for (std::size_t i = 0; i <= j; ++i) {
      const Complex hij = dot(basis[i], av);
      h(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = hij;
      h(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = std::conj(hij);
    }
    h(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j)) = std::real(h(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j)));
    return true;
  };

  extend(random_vector(n, rng));
  CVector next = basis.back();
  for (;;) {
    const bool grown = extend(apply_inverse(next));
    if (basis.size() >= std::min(k, n)) {
      ritz = rayleigh_ritz(a, basis, h, k);
      const bool done = std::all_of(ritz.residual_norms.begin(), ritz.residual_norms.end(),
                                    [&](double r) { return r <= threshold; });
      if (done || basis.size() == n)
        return finish(std::move(ritz), norm_est, shift, iterations, inner, true);
    }
    if (iterations >= opt.max_iterations)
      return finish(std::move(ritz), norm_est, shift, iterations, inner, false);
    if (!grown && basis.size() < m) {
      // Invariant subspace reached without covering k pairs: restart direction at random.
      next = random_vector(n, rng);
      continue;
    }
    if (basis.size() < m) {
      next = basis.back();
      continue;
    }
    // Thick restart: keep the lowest Ritz vectors and continue from the
    // worst wanted residual.
    const auto nb = static_cast<Eigen::Index>(basis.size());
    Eigen::SelfAdjointEigenSolver<DenseMatrix> eig(h.topLeftCorner(nb, nb));
    std::vector<CVector> kept;
    kept.reserve(m);
    for (std::size_t i = 0; i < keep; ++i) {
      CVector y = combine(basis, eig.eigenvectors().col(static_cast<Eigen::Index>(i)));
      append_orthonormal(std::move(y), kept, rng);
    }
    basis = std::move(kept);
    h.setZero();
    for (std::size_t j = 0; j < basis.size(); ++j) {
      const CVector av = matvec(a, basis[j]);
      for (std::size_t i = 0; i <= j; ++i) {
        const Complex hij = dot(basis[i], av);
        h(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = hij;
        h(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = std::conj(hij);
      }
    }
    std::size_t worst = 0;
    for (std::size_t i = 1; i < ritz.residual_norms.size(); ++i)
      if (ritz.residual_norms[i] > ritz.residual_norms[worst]) worst = i;
    next = ritz.residuals[worst];
  }
}

// Orthonormalizes the columns in place, dropping numerically dependent ones.
void orthonormalize_block(std::vector<CVector>& block) {
  std::vector<CVector> out;
  out.reserve(block.size());
  for (auto& v : block) {
    const double before = norm2(v);
    if (before == 0.0) continue;
    const double after = orthogonalize(v, out);
    if (after > 1e-10 * before) {
      scale(1.0 / after, v);
      out.push_back(std::move(v));
    }
  }
  block = std::move(out);
}

DenseMatrix projected(const CsrMatrix& a, const std::vector<CVector>& s) {
  const auto m = static_cast<Eigen::Index>(s.size());
  DenseMatrix h(m, m);
  for (Eigen::Index j = 0; j < m; ++j) {
    const CVector av = matvec(a, s[static_cast<std::size_t>(j)]);
    for (Eigen::Index i = 0; i <= j; ++i) {
      const Complex v = dot(s[static_cast<std::size_t>(i)], av);
      h(i, j) = v;
      h(j, i) = std::conj(v);
    }
    h(j, j) = std::real(h(j, j));
  }
  return h;
}

EigenReport lobpcg(const CsrMatrix& a, const EigenOptions& opt) {
  const auto n = static_cast<std::size_t>(a.nrows());
  const std::size_t k = opt.k;
  const double norm_est = a.norm_estimate();
  const double threshold = opt.tol * (norm_est > 0.0 ? norm_est : 1.0);
  std::mt19937_64 rng(opt.seed);

  std::vector<CVector> x;
  for (std::size_t i = 0; i < k; ++i) x.push_back(random_vector(n, rng));
  orthonormalize_block(x);
  std::vector<CVector> p;
  RitzSet ritz = rayleigh_ritz(a, x, projected(a, x), k);
  x = ritz.vectors;

  for (std::size_t it = 0; it < opt.max_iterations; ++it) {
    const bool done =
        std::all_of(ritz.residual_norms.begin(), ritz.residual_norms.end(), [&](double r) { return r <= threshold; });
    if (done) return finish(std::move(ritz), norm_est, 0.0, it, 0, true);

    std::vector<CVector> s = x;
    for (std::size_t i = 0; i < ritz.residuals.size(); ++i)
      if (ritz.residual_norms[i] > threshold) s.push_back(ritz.residuals[i]);
    for (const auto& v : p) s.push_back(v);
    orthonormalize_block(s);

    const DenseMatrix h = projected(a, s);
    Eigen::SelfAdjointEigenSolver<DenseMatrix> eig(h);
    if (eig.info() != Eigen::Success) throw SolverError("LOBPCG: dense eigensolver failed");
    const std::size_t count = std::min(k, s.size());

    std::vector<CVector> x_new, p_new;
    for (std::size_t i = 0; i < count; ++i) {
      const Eigen::VectorXcd c = eig.eigenvectors().col(static_cast<Eigen::Index>(i));
      x_new.push_back(combine(s, c));
      // Direction component outside the previous X block.
      Eigen::VectorXcd c_tail = c;
      c_tail.head(static_cast<Eigen::Index>(std::min(x.size(), s.size()))).setZero();
      if (s.size() > x.size()) p_new.push_back(combine(s, c_tail));
    }
    orthonormalize_block(x_new);
    x = std::move(x_new);
    p = std::move(p_new);
    ritz = rayleigh_ritz(a, x, projected(a, x), k);
    x = ritz.vectors;
    if (s.size() >= n) {
      // The search space already spans the whole space: the projection is exact.
      return finish(std::move(ritz), norm_est, 0.0, it + 1, 0, true);
    }
  }
  return finish(std::move(ritz), norm_est, 0.0, opt.max_iterations, 0, false);
}

}  // namespace

EigenReport smallest_eigenpairs(const CsrMatrix& a, const EigenOptions& options) {
  if (!a.hermitian()) throw std::invalid_argument("smallest_eigenpairs: matrix is not flagged hermitian");
  if (options.k < 1) throw std::invalid_argument("smallest_eigenpairs: k must be at least 1");
  if (!(options.tol > 0.0)) throw std::invalid_argument("smallest_eigenpairs: tol must be positive");
  if (static_cast<Index>(options.k) > a.nrows())
    throw std::invalid_argument("smallest_eigenpairs: k exceeds the matrix dimension");
  switch (options.strategy) {
    case EigenStrategy::ShiftInvertLanczos:
      return shift_invert_lanczos(a, options);
    case EigenStrategy::Lobpcg:
      return lobpcg(a, options);
  }
  throw std::invalid_argument("smallest_eigenpairs: unknown strategy");
}

}  // namespace magspec::linalg
