#include "magspec/geometry/gauge.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "magspec/parallel.hpp"

namespace magspec::geometry {

namespace {

bool uniform(const std::vector<double>& g) {
  if (g.size() < 3) return false;
  const double h = g[1] - g[0];
  if (!(h > 0)) return false;
  for (std::size_t k = 1; k < g.size(); ++k)
    if (std::abs(g[k] - g[k - 1] - h) > 1e-9 * h) return false;
  return true;
}

}  // namespace

std::vector<double> uniform_t_grid(double t_max, std::size_t n) {
  std::vector<double> g(n + 1);
  for (std::size_t k = 0; k <= n; ++k) g[k] = t_max * static_cast<double>(k) / static_cast<double>(n);
  return g;
}

GaugeA gauge_potential(AdaptedFrame& frame, const std::vector<double>& t_grid) {
  if (!uniform(t_grid) || t_grid.front() != 0.0)
    throw std::invalid_argument("gauge_potential: t grid must be uniform, start at 0 and have >= 3 points");
  if (!uniform(frame.r_grid) || !uniform(frame.s_grid))
    throw std::invalid_argument("gauge_potential: frame grids must be uniform with >= 3 points");
  if (frame.F.size() != frame.gamma.size()) F_integral(frame);

  GaugeA g;
  g.r_grid = frame.r_grid;
  g.s_grid = frame.s_grid;
  g.t_grid = t_grid;
  const std::size_t nr = frame.nr(), ns = frame.ns(), nt = t_grid.size();
  const double dr = frame.dr(), ds = frame.ds(), dt = t_grid[1] - t_grid[0];
  const std::size_t total = nr * ns * nt;
  g.A1.assign(total, 0.0);
  g.A2.assign(total, 0.0);
  g.A3.assign(total, 0.0);
  g.weighted_field.assign(total, Eigen::Vector3d::Zero());

  parallel_for(
      nr * ns,
      [&](std::size_t begin, std::size_t end) {
        for (std::size_t node = begin; node < end; ++node) {
          const std::size_t base = node * nt;
          for (std::size_t k = 0; k < nt; ++k) {
            const TubularPoint tp = tubular_point(frame, node, t_grid[k]);
            g.weighted_field[base + k] = tp.sqrt_det_g * tp.frame_field;
          }
          double i1 = 0.0, i2 = 0.0;
          for (std::size_t k = 0; k < nt; ++k) {
            if (k > 0) {
              i1 += 0.5 * dt * (g.weighted_field[base + k - 1].y() + g.weighted_field[base + k].y());
              i2 += 0.5 * dt * (g.weighted_field[base + k - 1].x() + g.weighted_field[base + k].x());
            }
            g.A1[base + k] = i1;
            g.A2[base + k] = -i2 + frame.F[node];
          }
        }
      },
      16);

  double wmax = 0.0;
  for (const auto& w : g.weighted_field) wmax = std::max(wmax, w.cwiseAbs().maxCoeff());
  double res = 0.0;
  for (std::size_t i = 1; i + 1 < nr; ++i)
    for (std::size_t j = 1; j + 1 < ns; ++j)
      for (std::size_t k = 1; k + 1 < nt; ++k) {
        auto at = [&](const std::vector<double>& a, std::size_t ii, std::size_t jj, std::size_t kk) {
          return a[g.index(ii, jj, kk)];
        };
        const double c1 = (at(g.A3, i, j + 1, k) - at(g.A3, i, j - 1, k)) / (2 * ds) -
                          (at(g.A2, i, j, k + 1) - at(g.A2, i, j, k - 1)) / (2 * dt);
        const double c2 = (at(g.A1, i, j, k + 1) - at(g.A1, i, j, k - 1)) / (2 * dt) -
                          (at(g.A3, i + 1, j, k) - at(g.A3, i - 1, j, k)) / (2 * dr);
        const double c3 = (at(g.A2, i + 1, j, k) - at(g.A2, i - 1, j, k)) / (2 * dr) -
                          (at(g.A1, i, j + 1, k) - at(g.A1, i, j - 1, k)) / (2 * ds);
        const Eigen::Vector3d& w = g.weighted_field[g.index(i, j, k)];
        res = std::max({res, std::abs(c1 - w.x()), std::abs(c2 - w.y()), std::abs(c3 - w.z())});
      }
  g.curl_residual = res;
  g.relative_curl_residual = wmax > 0 ? res / wmax : res;
  g.step = std::max({dr, ds, dt});
  g.curl_constant = res / (g.step * g.step);
  return g;
}

}  // namespace magspec::geometry
