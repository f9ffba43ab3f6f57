#include "magspec/direct/box_problem.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <ostream>
#include <sstream>

#include "magspec/error.hpp"
#include "magspec/log.hpp"
#include "magspec/parallel.hpp"

namespace magspec::direct {

using linalg::Complex;
using linalg::CsrMatrix;
using linalg::Index;

std::string_view to_string(BottomCondition b) { return b == BottomCondition::Neumann ? "neumann" : "dirichlet"; }

double BoxProblem::resolution_ratio() const { return std::max({dx(), dy(), dt()}) / std::sqrt(h); }

void BoxProblem::validate() const {
  if (!(h > 0) || !(L1 > 0) || !(L2 > 0) || !(T > 0))
    throw ConfigError("BoxProblem: h and the box extents must be positive");
  if (n1 < 2 || n2 < 2 || n3 < 1) throw ConfigError("BoxProblem: at least 2 x 2 x 1 grid intervals are needed");
  if (!field.potential_polynomials()[2].is_zero())
    throw ConfigError("BoxProblem: the potential must have A3 = 0 identically (plain Neumann condition at t = 0)");
  if (resolution_ratio() > 1.0 / 6.0 + 1e-12) {
    std::ostringstream os;
    os << "grid under-resolves magnetic length: max spacing " << std::max({dx(), dy(), dt()}) << " > sqrt(h)/6 = "
       << std::sqrt(h) / 6.0;
    throw ConfigError(os.str());
  }
}

nlohmann::json BoxProblem::to_json() const {
  return {{"h", h},
          {"centre", {centre.x(), centre.y()}},
          {"extents", {L1, L2, T}},
          {"counts", {n1, n2, n3}},
          {"spacing", {dx(), dy(), dt()}},
          {"unknowns", unknowns()},
          {"bottom", std::string(to_string(bottom))},
          {"field", field.name()}};
}

BoxProblem scaled_box(double h, const geometry::MagneticField& field, const Eigen::Vector2d& centre,
                      const BoxRule& rule) {
  if (!(h > 0)) throw ConfigError("scaled_box: h must be positive");
  if (!(rule.lateral > 0) || !(rule.depth > 0) || !(rule.points_per_length > 0))
    throw ConfigError("scaled_box: box rule factors must be positive");
  const double len = std::sqrt(h);
  BoxProblem p;
  p.h = h;
  p.centre = centre;
  p.field = field;
  p.L1 = p.L2 = rule.lateral * len;
  p.T = rule.depth * len;
  const double spacing = len / rule.points_per_length;
  p.n1 = p.n2 = static_cast<std::size_t>(std::ceil(2 * p.L1 / spacing - 1e-9));
  p.n3 = static_cast<std::size_t>(std::ceil(p.T / spacing - 1e-9));
  return p;
}

CsrMatrix assemble(const BoxProblem& p) {
  p.validate();
  const std::size_t nx = p.nx(), ny = p.ny(), nt = p.n3;
  const std::size_t n = p.unknowns();
  const double dx = p.dx(), dy = p.dy(), dt = p.dt(), h = p.h;
  const double cx = h * h / (dx * dx), cy = h * h / (dy * dy), ct = h * h / (dt * dt);

  // Link from node (i, j, k) to (i + 1, j, k) and to (i, j + 1, k). Both rows
  // touching an edge call these with the lower endpoint, so the two stored
  // entries are exact conjugates.
  auto link_x = [&](double xl, double y, double t) {
    const Eigen::Vector3d a = p.field.potential({xl + 0.5 * dx, y, -t});
    return std::polar(1.0, -a.x() * dx / h);
  };
  auto link_y = [&](double x, double yl, double t) {
    const Eigen::Vector3d a = p.field.potential({x, yl + 0.5 * dy, -t});
    return std::polar(1.0, -a.y() * dy / h);
  };

  std::vector<Index> offsets(n + 1, 0);
  for (std::size_t i = 0; i < nx; ++i)
    for (std::size_t j = 0; j < ny; ++j)
      for (std::size_t k = 0; k < nt; ++k) {
        Index c = 1;
        c += (i > 0) + (i + 1 < nx) + (j > 0) + (j + 1 < ny) + (k > 0) + (k + 1 < nt);
        offsets[p.index(i, j, k) + 1] = c;
      }
  for (std::size_t r = 0; r < n; ++r) offsets[r + 1] += offsets[r];
  std::vector<Index> cols(static_cast<std::size_t>(offsets[n]));
  std::vector<Complex> vals(cols.size());

  parallel_for(nx, [&](std::size_t ib, std::size_t ie) {
    for (std::size_t i = ib; i < ie; ++i) {
      const double x = p.x(i);
      for (std::size_t j = 0; j < ny; ++j) {
        const double y = p.y(j);
        for (std::size_t k = 0; k < nt; ++k) {
          const double t = p.t(k);
          const std::size_t row = p.index(i, j, k);
          std::size_t pos = static_cast<std::size_t>(offsets[row]);
          auto put = [&](std::size_t col, Complex v) {
            cols[pos] = static_cast<Index>(col);
            vals[pos] = v;
            ++pos;
          };
          double diag = 2 * cx + 2 * cy + 2 * ct;
          // Mirror ghost at t = 0 for Neumann; odd ghost for Dirichlet at t = 0 and t = T.
          if (k == 0) diag += p.bottom == BottomCondition::Neumann ? -ct : ct;
          if (k + 1 == nt) diag += ct;

          if (i > 0) put(p.index(i - 1, j, k), -cx * std::conj(link_x(p.x(i - 1), y, t)));
          if (j > 0) put(p.index(i, j - 1, k), -cy * std::conj(link_y(x, p.y(j - 1), t)));
          if (k > 0) put(row - 1, -ct);
          put(row, diag);
          if (k + 1 < nt) put(row + 1, -ct);
          if (j + 1 < ny) put(p.index(i, j + 1, k), -cy * link_y(x, y, t));
          if (i + 1 < nx) put(p.index(i + 1, j, k), -cx * link_x(x, y, t));
        }
      }
    }
  }, 1);
  return CsrMatrix(static_cast<Index>(n), static_cast<Index>(n), std::move(offsets), std::move(cols), std::move(vals),
                   true);
}

linalg::EigenReport solve_lowest(const BoxProblem& problem, std::size_t k, linalg::EigenOptions options,
                                 double shift) {
  const CsrMatrix a = assemble(problem);
  options.k = k;
  options.strategy = linalg::EigenStrategy::ShiftInvertLanczos;
  for (int attempt = 0;; ++attempt) {
    options.lower_bound = shift;
    try {
      linalg::EigenReport rep = linalg::smallest_eigenpairs(a, options);
      if (!rep.converged) {
        std::ostringstream os;
        os << "solve_lowest: eigensolver did not converge for h = " << problem.h << " (" << problem.unknowns()
           << " unknowns)";
        throw SolverError(os.str());
      }
      return rep;
    } catch (const SolverError& e) {
      if (!std::isfinite(shift) || attempt >= 2 || std::string(e.what()).find("breakdown") == std::string::npos)
        throw;
      warn("solve_lowest: shift " + std::to_string(shift) + " is not below the spectrum, halving it");
      shift *= 0.5;
    }
  }
}

double wall_mass(const BoxProblem& p, const linalg::CVector& psi, std::size_t cells) {
  double wall = 0.0, total = 0.0;
  for (std::size_t i = 0; i < p.nx(); ++i)
    for (std::size_t j = 0; j < p.ny(); ++j) {
      const bool near = i < cells || i + cells >= p.nx() || j < cells || j + cells >= p.ny();
      for (std::size_t k = 0; k < p.n3; ++k) {
        const double m = std::norm(psi[p.index(i, j, k)]);
        total += m;
        if (near) wall += m;
      }
    }
  return total > 0 ? wall / total : 0.0;
}

double bottom_mass(const BoxProblem& p, const linalg::CVector& psi, std::size_t cells) {
  double deep = 0.0, total = 0.0;
  for (std::size_t r = 0; r < psi.size(); ++r) {
    const double m = std::norm(psi[r]);
    total += m;
    if (r % p.n3 + cells >= p.n3) deep += m;
  }
  return total > 0 ? deep / total : 0.0;
}

void write_slice(std::ostream& os, const BoxProblem& p, const linalg::CVector& psi, std::size_t k) {
  if (k >= p.n3) throw std::invalid_argument("write_slice: layer index out of range");
  os << "# x y abs2 (t = " << p.t(k) << ")\n";
  const auto old = os.precision(10);
  for (std::size_t i = 0; i < p.nx(); ++i) {
    for (std::size_t j = 0; j < p.ny(); ++j)
      os << p.x(i) << ' ' << p.y(j) << ' ' << std::norm(psi[p.index(i, j, k)]) << '\n';
    os << '\n';
  }
  os.precision(old);
}

}  // namespace magspec::direct
