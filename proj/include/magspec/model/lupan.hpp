#pragma once

#include <cstddef>
#include <limits>

#include "magspec/linalg/csr_matrix.hpp"
#include "magspec/linalg/eigensolver.hpp"

namespace magspec::model {

/// Truncated half-plane s in (s_min, s_max), t in (0, t_max).
///
/// The n_s tangential nodes are interior (Dirichlet nodes at s_min and
/// s_max are not stored); the n_t normal points are cell centres
/// (j + 1/2) dt, with a mirror ghost for the Neumann edge t = 0 and an odd
/// ghost putting the Dirichlet zero exactly at t_max. A positive
/// strip_halfwidth additionally drops every point with
/// |t cos(theta) - s sin(theta)| > strip_halfwidth, where the potential
/// forces Gaussian decay anyway.
struct HalfPlaneGrid {
  double s_min = -20.0;
  double s_max = 20.0;
  double t_max = 20.0;
  std::size_t n_s = 400;
  std::size_t n_t = 200;
  double strip_halfwidth = 0.0;

  double ds() const { return (s_max - s_min) / static_cast<double>(n_s + 1); }
  double dt() const { return t_max / static_cast<double>(n_t); }
  double s(std::size_t i) const { return s_min + static_cast<double>(i + 1) * ds(); }
  double t(std::size_t j) const { return (static_cast<double>(j) + 0.5) * dt(); }

  /// Throws std::invalid_argument when the invariants fail.
  void validate() const;

  /// Grid on the given extents whose spacings do not exceed ds, dt.
  static HalfPlaneGrid with_spacing(double s_min, double s_max, double t_max, double ds, double dt,
                                    double strip_halfwidth = 0.0);
};

struct LuPanOptions {
  double edge_mass_limit = 1e-8;
  double tol = 1e-9;
  /// Shift for shift-invert. The band function never drops below
  /// Theta_0 ~ 0.59, so 0.5 is safe on any reasonable grid; a breakdown
  /// falls back to the Gershgorin shift.
  double lower_bound = 0.5;
  double inner_tol = 1e-8;
  linalg::EigenStrategy strategy = linalg::EigenStrategy::ShiftInvertLanczos;
};

struct EdgeMass {
  double s_min = 0.0, s_max = 0.0, t_max = 0.0, strip = 0.0;
  double total = 0.0;  // mass on the union of edge cells
};

struct LuPanResult {
  double theta = 0.0;
  double energy = 0.0;
  HalfPlaneGrid grid;
  EdgeMass edge_mass;
  std::size_t unknowns = 0;
  std::size_t iterations = 0;
  std::size_t inner_iterations = 0;
  double residual = 0.0;
};

/// Number of grid points kept by the strip mask.
std::size_t lupan_unknowns(double theta, const HalfPlaneGrid& grid);

/// Five-point discretization of (t cos theta - s sin theta)^2 + D_s^2 + D_t^2.
linalg::CsrMatrix lupan_matrix(double theta, const HalfPlaneGrid& grid);

/// Ground state energy plus edge diagnostics; never throws on edge mass.
LuPanResult lupan_solve(double theta, const HalfPlaneGrid& grid, const LuPanOptions& options = {});

/// Ground state energy e(theta) on a fixed grid. Throws BoxTooSmallError
/// when more than edge_mass_limit of the state sits in edge cells.
double lupan_energy(double theta, const HalfPlaneGrid& grid = {}, const LuPanOptions& options = {});

struct AutoBoxOptions {
  double ds = 0.1;
  double dt = 0.1;
  /// The box search runs at this multiple of the target spacing.
  double search_coarsening = 2.0;
  /// The fine solve shifts to (coarse energy - shift_margin), never below
  /// solve.lower_bound.
  double shift_margin = 0.06;
  double strip_halfwidth = 8.0;
  std::size_t max_rounds = 12;
  std::size_t max_unknowns = 3'000'000;
  LuPanOptions solve;
};

/// e(theta) on a box chosen for theta: the window follows the potential
/// well towards s ~ xi0 / tan(theta) for small angles and grows along the
/// slowly decaying direction for angles near pi/2, until the edge-mass
/// check passes at the target spacing.
LuPanResult lupan_energy_auto(double theta, const AutoBoxOptions& options = {});

}  // namespace magspec::model
