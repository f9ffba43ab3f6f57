#pragma once

#include <cstddef>
#include <iosfwd>
#include <string_view>

#include <Eigen/Core>

#include "json.hpp"
#include "magspec/geometry/magnetic_field.hpp"
#include "magspec/linalg/csr_matrix.hpp"
#include "magspec/linalg/eigensolver.hpp"

namespace magspec::direct {

enum class BottomCondition { Neumann, Dirichlet };
std::string_view to_string(BottomCondition b);

/// (-ih grad - A)^2 on the half-space box centre + [-L1, L1] x [-L2, L2] x [0, T]
/// in coordinates (x, y, t), with t = -z the depth below the flat boundary z = 0
/// of the domain {z < 0}. Lateral faces and t = T are Dirichlet, t = 0 is
/// Neumann (or Dirichlet for the comparison variant).
///
/// Grid: x and y nodes at -L + i dx, i = 1..n - 1 (the walls carry zero), t at
/// cell centres (k + 1/2) dt, k = 0..n3 - 1. Unknown (i, j, k) has index
/// (i n2' + j) n3 + k with n2' = n2 - 1.
struct BoxProblem {
  double h = 0.1;
  Eigen::Vector2d centre = Eigen::Vector2d::Zero();
  double L1 = 1.0, L2 = 1.0, T = 1.0;
  std::size_t n1 = 16, n2 = 16, n3 = 16;
  geometry::MagneticField field = geometry::constant_field(Eigen::Vector3d::Zero());
  BottomCondition bottom = BottomCondition::Neumann;

  double dx() const { return 2 * L1 / static_cast<double>(n1); }
  double dy() const { return 2 * L2 / static_cast<double>(n2); }
  double dt() const { return T / static_cast<double>(n3); }
  std::size_t nx() const { return n1 - 1; }
  std::size_t ny() const { return n2 - 1; }
  std::size_t unknowns() const { return nx() * ny() * n3; }
  std::size_t index(std::size_t i, std::size_t j, std::size_t k) const { return (i * ny() + j) * n3 + k; }
  double x(std::size_t i) const { return centre.x() - L1 + static_cast<double>(i + 1) * dx(); }
  double y(std::size_t j) const { return centre.y() - L2 + static_cast<double>(j + 1) * dy(); }
  double t(std::size_t k) const { return (static_cast<double>(k) + 0.5) * dt(); }
  /// Level of the grid resolution against the magnetic length: max spacing / sqrt(h).
  double resolution_ratio() const;

  /// ConfigError "grid under-resolves magnetic length" when a spacing exceeds
  /// sqrt(h)/6, and when the potential has a normal component A3.
  void validate() const;
  nlohmann::json to_json() const;
};

/// Box sizes in units of sqrt(h).
struct BoxRule {
  double lateral = 6.0;            // half-widths L1 = L2
  double depth = 8.0;              // T
  double points_per_length = 6.0;  // grid points per sqrt(h)
};
BoxProblem scaled_box(double h, const geometry::MagneticField& field, const Eigen::Vector2d& centre,
                      const BoxRule& rule = {});

/// Peierls (link-variable) discretization: each hop carries
/// exp(-(i/h) A(midpoint) . edge), so the matrix is Hermitian entry for entry
/// and gauge covariant for potentials whose gradients are linear.
linalg::CsrMatrix assemble(const BoxProblem& problem);

/// k lowest eigenpairs through the in-house shift-invert Lanczos solver.
/// A finite `shift` is used as the lower bound; if conjugate gradients break
/// down because it is not below the spectrum it is halved (twice at most).
linalg::EigenReport solve_lowest(const BoxProblem& problem, std::size_t k, linalg::EigenOptions options = {},
                                 double shift = std::numeric_limits<double>::quiet_NaN());

/// Fraction of |psi|^2 on nodes within `cells` grid cells of a lateral wall.
double wall_mass(const BoxProblem& problem, const linalg::CVector& psi, std::size_t cells = 2);
/// Fraction of |psi|^2 in the deepest `cells` layers.
double bottom_mass(const BoxProblem& problem, const linalg::CVector& psi, std::size_t cells = 2);

/// Plain-text dump of |psi|^2 on the t layer k: header "# x y abs2", then one line per node.
void write_slice(std::ostream& os, const BoxProblem& problem, const linalg::CVector& psi, std::size_t k = 0);

}  // namespace magspec::direct
