#include "magspec/model/lupan.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "magspec/error.hpp"

namespace magspec::model {

using linalg::Complex;
using linalg::CsrMatrix;
using linalg::Index;

void HalfPlaneGrid::validate() const {
  if (!(s_min < 0.0 && 0.0 < s_max)) throw std::invalid_argument("HalfPlaneGrid: need s_min < 0 < s_max");
  if (!(t_max > 0.0)) throw std::invalid_argument("HalfPlaneGrid: need t_max > 0");
  if (n_s < 3 || n_t < 3) throw std::invalid_argument("HalfPlaneGrid: need at least 3 points per direction");
  if (!(strip_halfwidth >= 0.0)) throw std::invalid_argument("HalfPlaneGrid: strip_halfwidth must be >= 0");
}

HalfPlaneGrid HalfPlaneGrid::with_spacing(double s_min, double s_max, double t_max, double ds, double dt,
                                          double strip_halfwidth) {
  if (!(ds > 0.0 && dt > 0.0)) throw std::invalid_argument("HalfPlaneGrid::with_spacing: spacings must be > 0");
  HalfPlaneGrid g;
  g.s_min = s_min;
  g.s_max = s_max;
  g.t_max = t_max;
  g.n_s = static_cast<std::size_t>(std::ceil((s_max - s_min) / ds - 1e-9)) - 1;
  g.n_t = static_cast<std::size_t>(std::ceil(t_max / dt - 1e-9));
  g.strip_halfwidth = strip_halfwidth;
  g.validate();
  return g;
}

namespace {

struct Layout {
  std::vector<Index> id;  // per (i, j), -1 when masked out
  std::vector<std::size_t> i_of, j_of;
};

Layout make_layout(double theta, const HalfPlaneGrid& g) {
  g.validate();
  const double c = std::cos(theta), s = std::sin(theta);
  Layout lay;
  lay.id.assign(g.n_s * g.n_t, -1);
  Index next = 0;
  for (std::size_t i = 0; i < g.n_s; ++i) {
    const double si = g.s(i);
    for (std::size_t j = 0; j < g.n_t; ++j) {
      if (g.strip_halfwidth > 0.0 && std::abs(g.t(j) * c - si * s) > g.strip_halfwidth) continue;
      lay.id[i * g.n_t + j] = next++;
      lay.i_of.push_back(i);
      lay.j_of.push_back(j);
    }
  }
  if (next == 0) throw std::invalid_argument("lupan: the strip mask removes every grid point");
  return lay;
}

CsrMatrix assemble(double theta, const HalfPlaneGrid& g, const Layout& lay) {
  const double c = std::cos(theta), s = std::sin(theta);
  const double cs = 1.0 / (g.ds() * g.ds()), ct = 1.0 / (g.dt() * g.dt());
  const auto n = static_cast<Index>(lay.i_of.size());
  std::vector<Index> offsets(static_cast<std::size_t>(n) + 1, 0);
  std::vector<Index> cols;
  std::vector<Complex> vals;
  cols.reserve(static_cast<std::size_t>(n) * 5);
  vals.reserve(static_cast<std::size_t>(n) * 5);
  auto push = [&](std::size_t i, std::size_t j, double v) {
    const Index k = lay.id[i * g.n_t + j];
    if (k < 0) return;
    cols.push_back(k);
    vals.emplace_back(v);
  };
  for (Index k = 0; k < n; ++k) {
    const std::size_t i = lay.i_of[k], j = lay.j_of[k];
    const double pot = g.t(j) * c - g.s(i) * s;
    double diag = 2.0 * cs + 2.0 * ct + pot * pot;
    if (j == 0) diag -= ct;
    if (j + 1 == g.n_t) diag += ct;
    // Column order follows the linear index i * n_t + j.
    if (i > 0) push(i - 1, j, -cs);
    if (j > 0) push(i, j - 1, -ct);
    cols.push_back(k);
    vals.emplace_back(diag);
    if (j + 1 < g.n_t) push(i, j + 1, -ct);
    if (i + 1 < g.n_s) push(i + 1, j, -cs);
    offsets[static_cast<std::size_t>(k) + 1] = static_cast<Index>(cols.size());
  }
  return CsrMatrix(n, n, std::move(offsets), std::move(cols), std::move(vals), true);
}

EdgeMass edge_mass(const HalfPlaneGrid& g, const Layout& lay, const linalg::CVector& v) {
  EdgeMass m;
  auto masked = [&](std::size_t i, std::size_t j) { return lay.id[i * g.n_t + j] < 0; };
  for (std::size_t k = 0; k < v.size(); ++k) {
    const std::size_t i = lay.i_of[k], j = lay.j_of[k];
    const double w = std::norm(v[k]);
    const bool at_smin = i == 0, at_smax = i + 1 == g.n_s, at_tmax = j + 1 == g.n_t;
    const bool at_strip = (i > 0 && masked(i - 1, j)) || (i + 1 < g.n_s && masked(i + 1, j)) ||
                          (j > 0 && masked(i, j - 1)) || (j + 1 < g.n_t && masked(i, j + 1));
    if (at_smin) m.s_min += w;
    if (at_smax) m.s_max += w;
    if (at_tmax) m.t_max += w;
    if (at_strip) m.strip += w;
    if (at_smin || at_smax || at_tmax || at_strip) m.total += w;
  }
  return m;
}

}  // namespace

std::size_t lupan_unknowns(double theta, const HalfPlaneGrid& grid) {
  return make_layout(theta, grid).i_of.size();
}

CsrMatrix lupan_matrix(double theta, const HalfPlaneGrid& grid) {
  return assemble(theta, grid, make_layout(theta, grid));
}

LuPanResult lupan_solve(double theta, const HalfPlaneGrid& grid, const LuPanOptions& options) {
  if (!(theta > 0.0 && theta < M_PI / 2))
    throw std::invalid_argument("lupan: theta must lie in (0, pi/2), got " + std::to_string(theta));
  const Layout lay = make_layout(theta, grid);
  const CsrMatrix a = assemble(theta, grid, lay);

  linalg::EigenOptions eo;
  eo.k = 1;
  eo.tol = options.tol;
  eo.strategy = options.strategy;
  eo.lower_bound = options.lower_bound;
  eo.inner_tol = options.inner_tol;
  linalg::EigenReport rep;
  try {
    rep = linalg::smallest_eigenpairs(a, eo);
  } catch (const SolverError&) {
    eo.lower_bound = std::numeric_limits<double>::quiet_NaN();
    rep = linalg::smallest_eigenpairs(a, eo);
  }
  if (!rep.converged)
    throw SolverError("lupan: eigensolver did not converge at theta = " + std::to_string(theta));

  LuPanResult r;
  r.theta = theta;
  r.energy = rep.eigenvalues[0];
  r.grid = grid;
  r.edge_mass = edge_mass(grid, lay, rep.eigenvectors[0]);
  r.unknowns = lay.i_of.size();
  r.iterations = rep.iterations;
  r.inner_iterations = rep.inner_iterations;
  r.residual = rep.residual_norms[0];
  return r;
}

namespace {

std::string describe(const LuPanResult& r) {
  std::ostringstream os;
  os << "ground state mass " << r.edge_mass.total << " in edge cells at theta = " << r.theta << " (s_min "
     << r.edge_mass.s_min << ", s_max " << r.edge_mass.s_max << ", t_max " << r.edge_mass.t_max << ", strip "
     << r.edge_mass.strip << ") on box s in [" << r.grid.s_min << ", " << r.grid.s_max << "], t in [0, "
     << r.grid.t_max << "]";
  return os.str();
}

}  // namespace

double lupan_energy(double theta, const HalfPlaneGrid& grid, const LuPanOptions& options) {
  const LuPanResult r = lupan_solve(theta, grid, options);
  if (r.edge_mass.total > options.edge_mass_limit)
    throw BoxTooSmallError(describe(r) + " exceeds " + std::to_string(options.edge_mass_limit) +
                           "; enlarge the box");
  return r.energy;
}

LuPanResult lupan_energy_auto(double theta, const AutoBoxOptions& o) {
  if (!(theta > 0.0 && theta < M_PI / 2))
    throw std::invalid_argument("lupan_energy_auto: theta must lie in (0, pi/2)");
  const double limit = o.solve.edge_mass_limit;
  // Born-Oppenheimer guess for the well position in s: the fibre operator at
  // fixed s is a scaled de Gennes operator minimized at xi0 ~ 0.768.
  const double s_c = std::min(1e3, 0.768 / (std::tan(theta) * std::sqrt(std::cos(theta))));
  double s_min = -10.0, s_max = std::max(10.0, s_c + 15.0), t_max = 15.0;
  double strip = o.strip_halfwidth;

  // The state decays along the well line t cos = s sin like
  // exp(-sqrt(1 - e) s) past s_c, so the box does not have to contain the
  // whole strip; the edge-mass check below decides how far it reaches.

  auto grow = [&](const LuPanResult& r) {
    const double target = 0.1 * limit;
    // Decay rate of the mass along a free direction; a state squeezed above
    // the continuum threshold by the box gives no estimate, so then grow
    // geometrically.
    const bool confined = r.energy > 1.0 - 1e-3;
    const double kappa = std::sqrt(std::max(1.0 - r.energy, 1e-3));
    auto step = [&](double m, double extent) {
      if (confined) return 0.6 * extent;
      return std::clamp(std::log(m / target) / (2.0 * kappa), 2.0, extent);
    };
    if (r.edge_mass.s_min > target) s_min -= step(r.edge_mass.s_min, std::abs(s_min));
    if (r.edge_mass.s_max > target) s_max += step(r.edge_mass.s_max, s_max);
    if (r.edge_mass.t_max > target) t_max += step(r.edge_mass.t_max, t_max);
    if (strip > 0.0 && r.edge_mass.strip > target) strip += 1.5;
  };

  double lower_bound = o.solve.lower_bound;
  auto solve_at = [&](double ds, double dt) {
    const HalfPlaneGrid g = HalfPlaneGrid::with_spacing(s_min, s_max, t_max, ds, dt, strip);
    const std::size_t n = lupan_unknowns(theta, g);
    if (n > o.max_unknowns)
      throw BoxTooSmallError("lupan_energy_auto: box for theta = " + std::to_string(theta) + " needs " +
                             std::to_string(n) + " unknowns, above the limit " + std::to_string(o.max_unknowns));
    LuPanOptions so = o.solve;
    so.lower_bound = lower_bound;
    LuPanResult res = lupan_solve(theta, g, so);
    lower_bound = std::max(o.solve.lower_bound, res.energy - o.shift_margin);
    return res;
  };

  const double f = std::max(1.0, o.search_coarsening);
  LuPanResult r;
  for (std::size_t round = 0; round < o.max_rounds; ++round) {
    const bool coarse = f > 1.0 && round + 1 < o.max_rounds;
    r = solve_at(coarse ? f * o.ds : o.ds, coarse ? f * o.dt : o.dt);
    const bool ok = r.edge_mass.total <= (coarse ? 0.1 : 1.0) * limit;
    if (ok && !coarse) return r;
    if (!ok) {
      grow(r);
      continue;
    }
    r = solve_at(o.ds, o.dt);
    if (r.edge_mass.total <= limit) return r;
    grow(r);
  }
  throw BoxTooSmallError("lupan_energy_auto: " + describe(r) + " after " + std::to_string(o.max_rounds) +
                         " enlargements");
}

}  // namespace magspec::model
